#pragma once

// Headline numbers from scans and exact states: the N(2,0) peak/base ratio R,
// clone fidelity F = (2R+1)/(2R+2), exact clone and anti-clone fidelities by
// direct state inspection, and a cross-basis universality report.

#include <algorithm>
#include <cmath>
#include <vector>

#include "stimclone/detection.hpp"
#include "stimclone/experiment.hpp"
#include "stimclone/fock.hpp"
#include "stimclone/jones.hpp"
#include "stimclone/pdc.hpp"

namespace stimclone::analysis {

using detection::Basis;
using detection::Scheme;
using experiment::CountRecord;
using experiment::RunMode;
using experiment::ScanResult;
using fock::FockState;

struct RatioEstimate {
  double ratio = 0.0;
  double sigma = 0.0;  // Poisson error propagation
  double baseline_rate_hz = 0.0;
  double peak_rate_hz = 0.0;
};

enum class CountSource { Auto, Expected, Sampled };

// Peak/base ratio of one scan curve. The baseline window is |tau| greater
// than three combined widths. With exact counts the peak is the maximum grid
// point; with sampled counts a Gaussian of known width (from the overlap
// model) plus a pedestal is fitted by weighted linear least squares, which
// avoids the upward shot-noise bias of taking the raw maximum.
inline RatioEstimate extract_ratio(const ScanResult& scan, Basis basis,
                                   Scheme scheme = Scheme::PolarizerPlusBs,
                                   CountSource source = CountSource::Auto) {
  const auto records = scan.records_for(basis, scheme);
  if (records.empty()) throw AnalysisError("scan holds no records for the requested curve");
  const bool sampled = source == CountSource::Sampled ||
                       (source == CountSource::Auto && scan.config.mode != RunMode::Exact);

  const double width = scan.config.overlap.combined_width_fs();
  std::vector<double> counts, delays;
  counts.reserve(records.size());
  for (const auto& r : records) {
    counts.push_back(sampled ? static_cast<double>(r.sampled_count) : r.expected_count);
    delays.push_back(r.delay_fs);
  }

  std::vector<std::size_t> baseline_idx;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (std::abs(delays[i]) > 3.0 * width) baseline_idx.push_back(i);
  }
  if (baseline_idx.size() < 3) {
    throw AnalysisError("need at least 3 far-delay points (|tau| > 3 widths) for the baseline");
  }

  const double duration = scan.config.duration_per_point_s;
  RatioEstimate est;

  if (!sampled) {
    double base_sum = 0.0;
    for (std::size_t i : baseline_idx) base_sum += counts[i];
    const double base = base_sum / static_cast<double>(baseline_idx.size());
    const double peak = *std::max_element(counts.begin(), counts.end());
    if (base <= 0.0) throw AnalysisError("baseline count is zero");
    est.ratio = peak / base;
    est.baseline_rate_hz = base / duration;
    est.peak_rate_hz = peak / duration;
    // Treat counts as Poisson means.
    const double var_base = base_sum / static_cast<double>(baseline_idx.size() * baseline_idx.size());
    const double var_peak = peak;
    est.sigma = est.ratio * std::sqrt(var_peak / (peak * peak) + var_base / (base * base));
    return est;
  }

  // Weighted linear fit counts ~ B + A * exp(-tau^2 / (s1^2 + s2^2)).
  const double ss = width * width;
  double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double x = std::exp(-delays[i] * delays[i] / ss);
    const double w = 1.0 / std::max(counts[i], 1.0);  // 1/var, Poisson
    sw += w;
    swx += w * x;
    swxx += w * x * x;
    swy += w * counts[i];
    swxy += w * x * counts[i];
  }
  const double det = sw * swxx - swx * swx;
  if (std::abs(det) <= 0.0) throw AnalysisError("degenerate Gaussian-peak fit");
  const double base = (swxx * swy - swx * swxy) / det;   // pedestal B
  const double amp = (sw * swxy - swx * swy) / det;      // peak amplitude A
  if (base <= 0.0) throw AnalysisError("fitted baseline is not positive");
  const double var_base = swxx / det;
  const double var_amp = sw / det;
  const double cov = -swx / det;

  est.ratio = (base + amp) / base;
  est.baseline_rate_hz = base / duration;
  est.peak_rate_hz = (base + amp) / duration;
  // R = 1 + A/B: dR/dA = 1/B, dR/dB = -A/B^2.
  est.sigma = std::sqrt(var_amp / (base * base) + amp * amp * var_base / std::pow(base, 4) -
                        2.0 * amp * cov / std::pow(base, 3));
  return est;
}

// F = (2R+1)/(2R+2): equal-polarization pairs R/(R+1) are perfect clones,
// opposite pairs 1/(R+1) give the right photon half the time.
inline double fidelity_from_ratio(double ratio) {
  if (ratio < 0.0) throw AnalysisError("ratio must be >= 0");
  return (2.0 * ratio + 1.0) / (2.0 * ratio + 2.0);
}

inline double fidelity_sigma_from_ratio(double ratio, double sigma_ratio) {
  // dF/dR = 1 / (2 (R+1)^2)
  return sigma_ratio / (2.0 * (ratio + 1.0) * (ratio + 1.0));
}

namespace internal {

struct ConditionalTallies {
  double conditioned = 0.0;   // one b photon, two a/c photons
  double clone_match = 0.0;   // expected matching fraction numerator
  double anticlone_orth = 0.0;  // b photon orthogonal to the input
};

// Rotates the analysis frame so the input polarization is v, then tallies
// the three-photon sector.
inline ConditionalTallies tally(const FockState& state, const Jones& input_jones) {
  const auto& reg = *state.registry();
  const JonesMatrix w = basis_change_to_v(input_jones);
  FockState rotated = state;
  for (auto ch : {fock::kChannelA, fock::kChannelC, fock::kChannelB}) {
    rotated = optics::apply_transform(rotated, optics::jones_element(reg, ch, w, "analysis_frame"));
  }
  const auto b_modes = reg.channel_modes(fock::kChannelB);
  std::vector<fock::ModeId> ac_modes = reg.channel_modes(fock::kChannelA);
  for (auto m : reg.channel_modes(fock::kChannelC)) ac_modes.push_back(m);
  const auto av = reg.id(fock::kChannelA, fock::Pol::V);
  const auto cv = reg.id(fock::kChannelC, fock::Pol::V);
  const auto bh = reg.id(fock::kChannelB, fock::Pol::H);

  ConditionalTallies t;
  for (const auto& [occ, amp] : rotated.terms()) {
    if (fock::photons_in(occ, b_modes) != 1) continue;
    if (fock::photons_in(occ, ac_modes) != 2) continue;
    const double p = std::norm(amp);
    t.conditioned += p;
    t.clone_match += p * 0.5 * static_cast<double>(occ[av.value] + occ[cv.value]);
    if (occ[bh.value] == 1) t.anticlone_orth += p;
  }
  return t;
}

}  // namespace internal

// Probability that a uniformly picked photon among the two clones carries the
// input polarization, conditioned on a herald (one b photon) and exactly two
// photons in the a/c beam.
inline double clone_fidelity_exact(const FockState& state, const Jones& input_jones) {
  const auto t = internal::tally(state, input_jones);
  if (t.conditioned <= 0.0) throw AnalysisError("state has no heralded three-photon component");
  return t.clone_match / t.conditioned;
}

// Probability that the heralding b photon is orthogonal to the input
// polarization, under the same conditioning.
inline double anticlone_fidelity_exact(const FockState& state, const Jones& input_jones) {
  const auto t = internal::tally(state, input_jones);
  if (t.conditioned <= 0.0) throw AnalysisError("state has no heralded three-photon component");
  return t.anticlone_orth / t.conditioned;
}

// Dephasing-aware variants: conditional probabilities over the classical
// phase ensemble produced by the source.
inline double clone_fidelity(const pdc::InputSpec& spec, const pdc::PdcConfig& cfg,
                             fock::RegistryPtr registry) {
  double cond = 0.0, match = 0.0;
  const FockState injected = pdc::inject_input(spec, registry);
  for (const auto& member : pdc::evolve_dephased(injected, cfg)) {
    const auto t = internal::tally(member.state, spec.polarization);
    cond += member.weight * t.conditioned;
    match += member.weight * t.clone_match;
  }
  if (cond <= 0.0) throw AnalysisError("state has no heralded three-photon component");
  return match / cond;
}

inline double anticlone_fidelity(const pdc::InputSpec& spec, const pdc::PdcConfig& cfg,
                                 fock::RegistryPtr registry) {
  double cond = 0.0, orth = 0.0;
  const FockState injected = pdc::inject_input(spec, registry);
  for (const auto& member : pdc::evolve_dephased(injected, cfg)) {
    const auto t = internal::tally(member.state, spec.polarization);
    cond += member.weight * t.conditioned;
    orth += member.weight * t.anticlone_orth;
  }
  if (cond <= 0.0) throw AnalysisError("state has no heralded three-photon component");
  return orth / cond;
}

struct BasisFidelity {
  Basis basis = Basis::LinearVH;
  RatioEstimate ratio;
  double fidelity = 0.0;
  double sigma = 0.0;
};

struct FidelityReport {
  std::vector<BasisFidelity> per_basis;
  double optimal = 5.0 / 6.0;
  double anticlone = 0.0;
  double spread = 0.0;        // max pairwise |F_i - F_j|
  double spread_sigma = 0.0;  // combined sigma of the extremal pair
  bool universal = false;
  double spread_threshold = 0.0;
};

// Per-basis fidelities plus a pass/fail universality verdict: the spread must
// not exceed threshold_abs + 2 sigma of the extremal pair. The anti-clone
// fidelity is evaluated exactly at the scan's zero-delay overlap.
inline FidelityReport universality_report(const ScanResult& scan,
                                          double spread_threshold_abs = 1e-6,
                                          CountSource source = CountSource::Auto) {
  if (scan.config.bases.size() < 2) {
    throw AnalysisError("universality report needs at least 2 bases");
  }
  FidelityReport report;
  report.spread_threshold = spread_threshold_abs;
  for (Basis basis : scan.config.bases) {
    BasisFidelity bf;
    bf.basis = basis;
    bf.ratio = extract_ratio(scan, basis, Scheme::PolarizerPlusBs, source);
    bf.fidelity = fidelity_from_ratio(bf.ratio.ratio);
    bf.sigma = fidelity_sigma_from_ratio(bf.ratio.ratio, bf.ratio.sigma);
    report.per_basis.push_back(bf);
  }
  double worst = 0.0, worst_sigma = 0.0;
  for (std::size_t i = 0; i < report.per_basis.size(); ++i) {
    for (std::size_t j = i + 1; j < report.per_basis.size(); ++j) {
      const double d = std::abs(report.per_basis[i].fidelity - report.per_basis[j].fidelity);
      if (d > worst) {
        worst = d;
        worst_sigma = std::sqrt(report.per_basis[i].sigma * report.per_basis[i].sigma +
                                report.per_basis[j].sigma * report.per_basis[j].sigma);
      }
    }
  }
  report.spread = worst;
  report.spread_sigma = worst_sigma;
  report.universal = worst <= spread_threshold_abs + 2.0 * worst_sigma;

  pdc::InputSpec spec;
  spec.polarization = scan.config.input_jones_for(scan.config.bases.front());
  spec.gamma = scan.config.fidelity_gamma.value_or(optics::overlap_gamma(scan.config.overlap, 0.0));
  report.anticlone = anticlone_fidelity(spec, scan.config.pdc, detection::make_cloning_registry());
  return report;
}

}  // namespace stimclone::analysis
