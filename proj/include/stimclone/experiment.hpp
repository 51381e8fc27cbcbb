#pragma once

// Delay-scan orchestration: per delay point, build the source + input +
// analyzer pipeline, mix over input photon statistics and dephasing phases,
// and produce expected rates plus (optionally) sampled counts.
//
// Probability bookkeeping is perturbative: the evolved state keeps the
// zeroth-order amplitude 1 and is not renormalized, so every pair-production
// pattern carries its exact truncated-order probability. The truncation's
// unitarity excess (norm^2 - 1, second order in kappa t) is removed from the
// elastic channel by subtracting that weight of the unevolved input's pattern
// distribution, which is where the missing zeroth-order depletion belongs.
// This keeps outcome tables closed while the N(1,1) rate stays exactly flat
// in the delay and detector efficiency cancels exactly in peak/base ratios.

#include <atomic>
#include <mutex>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "stimclone/detection.hpp"
#include "stimclone/fock.hpp"
#include "stimclone/optics.hpp"
#include "stimclone/pdc.hpp"

namespace stimclone::experiment {

using detection::AnalyzerConfig;
using detection::Basis;
using detection::DetectorModel;
using detection::OutcomeTable;
using detection::Scheme;
using fock::FockState;
using fock::RegistryPtr;

enum class RunMode { Exact, MonteCarlo, Both };

inline const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::Exact:
      return "exact";
    case RunMode::MonteCarlo:
      return "mc";
    case RunMode::Both:
      return "both";
  }
  return "?";
}

// Schemes in record order: the N(2,0) curve first, then N(1,1).
inline constexpr std::array<Scheme, 2> kSchemeOrder = {Scheme::PolarizerPlusBs,
                                                       Scheme::PbsCoincidence};

struct ExperimentConfig {
  pdc::PdcConfig pdc;
  pdc::PhotonNumberDistribution photon_number = pdc::PhotonNumberDistribution::exactly_one();
  // Input polarization; empty means "follow the scanned basis", i.e. use each
  // basis' reference state as the input, as in a universality scan.
  std::optional<Jones> input_polarization;
  optics::OverlapModel overlap;
  std::vector<Basis> bases = {Basis::LinearVH};
  DetectorModel detector;
  std::vector<double> delay_grid_fs;
  double rep_rate_hz = 80e6;
  double duration_per_point_s = 600.0;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Exact;
  std::optional<double> fidelity_gamma;  // gamma for `fidelity`; default gamma(0)

  void validate() const {
    pdc.validate();
    overlap.validate();
    detector.validate();
    if (bases.empty()) throw ConfigError("bases must not be empty");
    if (delay_grid_fs.empty()) throw ConfigError("delay_grid_fs must not be empty");
    if (photon_number.kind == pdc::PhotonNumberDistribution::Kind::Poisson &&
        photon_number.mean < 0.0) {
      throw ConfigError("input.photon_number.poisson_mean must be >= 0");
    }
    if (!(rep_rate_hz > 0.0)) throw ConfigError("rep_rate_hz must be > 0");
    if (!(duration_per_point_s > 0.0)) throw ConfigError("duration_per_point_s must be > 0");
    if (input_polarization) {
      if (std::abs(jones_norm(*input_polarization) - 1.0) > 1e-12) {
        throw ConfigError("input_polarization must be a unit Jones vector");
      }
    }
    if (fidelity_gamma && (*fidelity_gamma < 0.0 || *fidelity_gamma > 1.0)) {
      throw ConfigError("fidelity_gamma must lie in [0,1]");
    }
  }

  Jones input_jones_for(Basis basis) const {
    return input_polarization ? *input_polarization : detection::basis_input_jones(basis);
  }

  std::int64_t pulses_per_point() const {
    return static_cast<std::int64_t>(std::llround(rep_rate_hz * duration_per_point_s));
  }
};

struct PointResult {
  double delay_fs = 0.0;
  double gamma = 0.0;
  OutcomeTable table;        // per-pulse click-pattern probabilities, sums to 1
  double event_rate_hz = 0.0;    // classified N(2,0) or N(1,1) rate
  double trigger_rate_hz = 0.0;  // any pattern containing the trigger
};

// Exact per-pulse outcome probabilities for one delay point and scheme.
inline PointResult run_point(const ExperimentConfig& cfg, double delay_fs, Basis basis,
                             Scheme scheme) {
  cfg.validate();
  const RegistryPtr registry = detection::make_cloning_registry();
  const double gamma = optics::overlap_gamma(cfg.overlap, delay_fs);

  pdc::InputSpec input;
  input.polarization = cfg.input_jones_for(basis);
  input.gamma = gamma;
  input.photon_number = cfg.photon_number;

  std::vector<std::pair<double, int>> layers;  // (weight, photon count)
  if (cfg.photon_number.kind == pdc::PhotonNumberDistribution::Kind::ExactlyOne) {
    layers = {{1.0, 1}};
  } else {
    const auto w = pdc::poisson_layer_weights(cfg.photon_number.mean);
    layers = {{w[0], 0}, {w[1], 1}, {w[2], 2}};
  }

  const AnalyzerConfig analyzer{basis, scheme};
  const auto transforms = detection::analyzer_transforms(*registry, analyzer);
  const auto sets = detection::detector_sets(*registry);

  OutcomeTable table;
  for (const auto& [layer_weight, photons] : layers) {
    const FockState injected = pdc::input_layer(input, registry, photons);
    FockState elastic = injected;
    for (const auto& t : transforms) elastic = optics::apply_transform(elastic, t);
    for (const auto& member : pdc::evolve_dephased(injected, cfg.pdc)) {
      FockState analyzed = member.state;
      for (const auto& t : transforms) analyzed = optics::apply_transform(analyzed, t);
      const double w = layer_weight * member.weight;
      detection::accumulate_pattern_weights(analyzed, sets, cfg.detector, w, table.p);
      // Remove the truncation's unitarity excess from the elastic channel.
      const double excess = member.state.norm_squared() - 1.0;
      detection::accumulate_pattern_weights(elastic, sets, cfg.detector, -w * excess, table.p);
    }
  }
  if (std::abs(table.total() - 1.0) > registry->tolerances().probability_sum) {
    throw NumericalError("outcome table failed to close; cutoff too tight?");
  }
  for (double& p : table.p) {
    if (p < 0.0 && p > -registry->tolerances().probability_sum) p = 0.0;
  }

  PointResult result;
  result.delay_fs = delay_fs;
  result.gamma = gamma;
  result.table = table;
  result.event_rate_hz = table.p[detection::kTripleCoincidence] * cfg.rep_rate_hz;
  double trigger_prob = 0.0;
  for (int pattern = 0; pattern < detection::kNumPatterns; ++pattern) {
    if (pattern & detection::kTriggerBit) trigger_prob += table.p[pattern];
  }
  result.trigger_rate_hz = trigger_prob * cfg.rep_rate_hz;
  return result;
}

struct CountRecord {
  double delay_fs = 0.0;
  double gamma = 0.0;
  Basis basis = Basis::LinearVH;
  Scheme scheme = Scheme::PolarizerPlusBs;
  double expected_rate_hz = 0.0;
  double expected_count = 0.0;
  std::int64_t sampled_count = 0;
  double expected_trigger_count = 0.0;
  std::int64_t sampled_trigger_count = 0;
};

struct ScanResult {
  ExperimentConfig config;
  std::vector<CountRecord> records;  // ordered by (basis, scheme, delay)

  std::vector<CountRecord> records_for(Basis basis, Scheme scheme) const {
    std::vector<CountRecord> out;
    for (const auto& r : records) {
      if (r.basis == basis && r.scheme == scheme) out.push_back(r);
    }
    return out;
  }
};

namespace internal {

// Deterministic parallel map: work units are dispatched by atomic index and
// written into pre-sized slots, so the result is identical for any worker
// count.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
  if (workers == 0) workers = 1;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace internal

// Full scan over delay grid x bases x both schemes. Monte Carlo substreams
// are derived from (seed, basis, scheme, point), never from worker identity.
inline ScanResult run_scan(const ExperimentConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  ScanResult result;
  result.config = cfg;

  struct Unit {
    std::size_t basis_idx, scheme_idx, point_idx;
  };
  std::vector<Unit> units;
  for (std::size_t b = 0; b < cfg.bases.size(); ++b) {
    for (std::size_t s = 0; s < kSchemeOrder.size(); ++s) {
      for (std::size_t p = 0; p < cfg.delay_grid_fs.size(); ++p) units.push_back({b, s, p});
    }
  }
  result.records.resize(units.size());

  const bool sample = cfg.mode != RunMode::Exact;
  const std::int64_t pulses = cfg.pulses_per_point();

  internal::parallel_for(units.size(), threads, [&](std::size_t i) {
    const Unit& u = units[i];
    const Basis basis = cfg.bases[u.basis_idx];
    const Scheme scheme = kSchemeOrder[u.scheme_idx];
    const double delay = cfg.delay_grid_fs[u.point_idx];
    const PointResult point = run_point(cfg, delay, basis, scheme);

    CountRecord rec;
    rec.delay_fs = delay;
    rec.gamma = point.gamma;
    rec.basis = basis;
    rec.scheme = scheme;
    rec.expected_rate_hz = point.event_rate_hz;
    rec.expected_count = point.event_rate_hz * cfg.duration_per_point_s;
    rec.expected_trigger_count = point.trigger_rate_hz * cfg.duration_per_point_s;
    if (sample) {
      const std::uint64_t sub = detection::derive_seed(
          cfg.seed, {static_cast<std::uint64_t>(u.basis_idx), static_cast<std::uint64_t>(u.scheme_idx),
                     static_cast<std::uint64_t>(u.point_idx)});
      const auto counts = detection::sample_events(point.table, pulses, sub);
      rec.sampled_count = counts[detection::kTripleCoincidence];
      for (int pattern = 0; pattern < detection::kNumPatterns; ++pattern) {
        if (pattern & detection::kTriggerBit) rec.sampled_trigger_count += counts[pattern];
      }
    }
    result.records[i] = rec;
  });
  return result;
}

}  // namespace stimclone::experiment
