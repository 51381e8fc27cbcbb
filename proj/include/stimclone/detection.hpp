#pragma once

// Analyzer configurations and detector models. Output states are reduced to
// click-pattern probabilities over {trigger, D2, D3} for threshold
// detectors (click probability 1 - (1-eta)^n, no photon-number resolution),
// plus a seeded multinomial sampler for Monte Carlo counting.
//
// Geometry shared by both measurement schemes: the trigger detector watches
// channel b; D2 watches the transmitted analyzer arm (channels a and c, which
// the detectors cannot tell apart); D3 watches the reflected arm (the port
// ancillas paired with a and c).

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "stimclone/fock.hpp"
#include "stimclone/jones.hpp"
#include "stimclone/optics.hpp"

namespace stimclone::detection {

using fock::FockState;
using fock::kChannelA;
using fock::kChannelB;
using fock::kChannelC;
using fock::ModeId;
using fock::ModeRegistry;
using fock::Occupation;
using fock::Pol;
using fock::RegistryPtr;
using optics::ModeTransform;

enum class Basis { LinearVH, Linear45, Circular };
enum class Scheme { PbsCoincidence, PolarizerPlusBs };  // N(1,1) / N(2,0)

inline const char* basis_name(Basis b) {
  switch (b) {
    case Basis::LinearVH:
      return "vh";
    case Basis::Linear45:
      return "45";
    case Basis::Circular:
      return "circ";
  }
  return "?";
}

inline const char* scheme_name(Scheme s) {
  return s == Scheme::PolarizerPlusBs ? "N20" : "N11";
}

struct AnalyzerConfig {
  Basis basis = Basis::LinearVH;
  Scheme scheme = Scheme::PbsCoincidence;
};

struct DetectorModel {
  double efficiency = 1.0;
  double dark_count_prob = 0.0;

  void validate() const {
    if (efficiency < 0.0 || efficiency > 1.0) {
      throw ConfigError("detector.efficiency must lie in [0,1]");
    }
    if (dark_count_prob < 0.0 || dark_count_prob > 1.0) {
      throw ConfigError("detector.dark_count_prob must lie in [0,1]");
    }
  }

  double click_probability(int photons) const {
    return 1.0 - (1.0 - dark_count_prob) * std::pow(1.0 - efficiency, photons);
  }
};

// Click patterns are bitmasks over the three detectors.
inline constexpr std::uint8_t kTriggerBit = 1;
inline constexpr std::uint8_t kD2Bit = 2;
inline constexpr std::uint8_t kD3Bit = 4;
inline constexpr std::uint8_t kTripleCoincidence = kTriggerBit | kD2Bit | kD3Bit;
inline constexpr int kNumPatterns = 8;

struct OutcomeTable {
  std::array<double, kNumPatterns> p{};

  double total() const {
    double t = 0.0;
    for (double x : p) t += x;
    return t;
  }
};

enum class EventClass { N20, N11, TriggerOnly, Other };

inline EventClass classify(std::uint8_t pattern, Scheme scheme) {
  if (pattern == kTripleCoincidence) {
    return scheme == Scheme::PolarizerPlusBs ? EventClass::N20 : EventClass::N11;
  }
  if (pattern == kTriggerBit) return EventClass::TriggerOnly;
  return EventClass::Other;
}

// Registry for the full pipeline: a, b, c plus the polarizer loss channels
// and beam-splitter/PBS reflection ports for the two temporal layers a and c.
// Ancilla index 0 pairs with a, index 1 with c.
inline RegistryPtr make_cloning_registry(int max_total_photons = 6, Tolerances tol = {}) {
  using fock::ModeSpec;
  std::vector<ModeSpec> modes;
  for (auto ch : {kChannelA, kChannelB, kChannelC, fock::loss_channel(0), fock::loss_channel(1),
                  fock::port_channel(0), fock::port_channel(1)}) {
    modes.push_back({ch, Pol::V});
    modes.push_back({ch, Pol::H});
  }
  return std::make_shared<const ModeRegistry>(std::move(modes), max_total_photons, tol);
}

// Reference input state of each measurement basis; the basis waveplate maps
// it onto v (and its orthogonal partner onto h, up to phase).
inline Jones basis_input_jones(Basis basis) {
  switch (basis) {
    case Basis::LinearVH:
      return jones_v();
    case Basis::Linear45:
      return jones_diag();
    case Basis::Circular:
      return jones_circ_left();
  }
  throw UsageError("unknown basis");
}

// Waveplate settings per basis: none for v/h, a half-wave plate at 22.5
// degrees for +-45, a quarter-wave plate at 45 degrees for circular.
inline std::vector<ModeTransform> basis_waveplates(const ModeRegistry& reg, Basis basis) {
  std::vector<ModeTransform> out;
  switch (basis) {
    case Basis::LinearVH:
      break;
    case Basis::Linear45:
      for (auto ch : {kChannelA, kChannelC}) {
        out.push_back(optics::half_wave_plate(reg, ch, M_PI / 8.0));
      }
      break;
    case Basis::Circular:
      for (auto ch : {kChannelA, kChannelC}) {
        out.push_back(optics::quarter_wave_plate(reg, ch, M_PI / 4.0));
      }
      break;
  }
  return out;
}

// The full analyzer: basis waveplates on the a/c beam, then either a PBS
// (opposite polarizations split deterministically; N(1,1)) or a polarizer at
// the basis polarization followed by a 50/50 beam splitter (identical pairs
// detected probabilistically; N(2,0)). Elements act on both temporal layers.
inline std::vector<ModeTransform> analyzer_transforms(const ModeRegistry& reg,
                                                      const AnalyzerConfig& cfg) {
  std::vector<ModeTransform> out = basis_waveplates(reg, cfg.basis);
  const std::array<std::pair<fock::SpatialLabel, std::uint8_t>, 2> arms = {
      std::make_pair(kChannelA, std::uint8_t{0}), std::make_pair(kChannelC, std::uint8_t{1})};
  if (cfg.scheme == Scheme::PbsCoincidence) {
    for (auto [ch, idx] : arms) {
      out.push_back(optics::pbs(reg, ch, fock::port_channel(idx)));
    }
  } else {
    for (auto [ch, idx] : arms) {
      out.push_back(optics::polarizer(reg, ch, fock::loss_channel(idx), 0.0));
    }
    for (auto [ch, idx] : arms) {
      out.push_back(optics::beam_splitter(reg, ch, fock::port_channel(idx), 0.5));
    }
  }
  return out;
}

struct DetectorSets {
  std::vector<ModeId> trigger;
  std::vector<ModeId> d2;
  std::vector<ModeId> d3;
};

inline DetectorSets detector_sets(const ModeRegistry& reg) {
  DetectorSets sets;
  sets.trigger = reg.channel_modes(kChannelB);
  for (auto ch : {kChannelA, kChannelC}) {
    for (ModeId m : reg.channel_modes(ch)) sets.d2.push_back(m);
  }
  for (auto ch : {fock::port_channel(0), fock::port_channel(1)}) {
    for (ModeId m : reg.channel_modes(ch)) sets.d3.push_back(m);
  }
  return sets;
}

// Adds weight * P(pattern | state) for every click pattern, treating `state`
// as-is (no normalization). Works tuple by tuple: threshold-detector POVMs
// are diagonal in the occupation basis of the detector mode sets.
inline void accumulate_pattern_weights(const FockState& state, const DetectorSets& sets,
                                       const DetectorModel& det, double weight,
                                       std::array<double, kNumPatterns>& acc) {
  for (const auto& [occ, amp] : state.terms()) {
    const double p = weight * std::norm(amp);
    const double click[3] = {det.click_probability(fock::photons_in(occ, sets.trigger)),
                             det.click_probability(fock::photons_in(occ, sets.d2)),
                             det.click_probability(fock::photons_in(occ, sets.d3))};
    for (int pattern = 0; pattern < kNumPatterns; ++pattern) {
      double term = p;
      for (int d = 0; d < 3; ++d) {
        term *= (pattern & (1 << d)) ? click[d] : (1.0 - click[d]);
      }
      acc[pattern] += term;
    }
  }
}

// Exact outcome probabilities for a normalized state behind the analyzer.
inline OutcomeTable outcome_probabilities(const FockState& state, const AnalyzerConfig& cfg,
                                          const DetectorModel& det) {
  det.validate();
  if (!fock::is_normalized(state)) {
    throw UsageError("outcome_probabilities requires a normalized state");
  }
  const ModeRegistry& reg = *state.registry();
  FockState analyzed = state;
  for (const ModeTransform& t : analyzer_transforms(reg, cfg)) {
    analyzed = optics::apply_transform(analyzed, t);
  }
  OutcomeTable table;
  accumulate_pattern_weights(analyzed, detector_sets(reg), det, 1.0, table.p);
  // Pin closure exactly; the no-click entry absorbs roundoff.
  double clicks = 0.0;
  for (int pattern = 1; pattern < kNumPatterns; ++pattern) clicks += table.p[pattern];
  table.p[0] = 1.0 - clicks;
  return table;
}

// -- Seeded sampling ----------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic per-work-unit substream: hash the seed with the unit indices
// so results do not depend on how units are assigned to workers.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t idx : indices) h = splitmix64(h ^ (idx + 0x9e3779b97f4a7c15ULL));
  return h;
}

using EventCounts = std::array<std::int64_t, kNumPatterns>;

// One multinomial draw over the outcome table: sequential conditional
// binomials over the click patterns, remainder to the no-click pattern.
// Bit-identical for a fixed seed.
inline EventCounts sample_events(const OutcomeTable& table, std::int64_t pulses,
                                 std::uint64_t seed) {
  if (pulses <= 0) throw UsageError("sample_events requires pulses > 0");
  std::mt19937_64 rng(splitmix64(seed));
  EventCounts counts{};
  std::int64_t remaining = pulses;
  double mass = 1.0;
  for (int pattern = 1; pattern < kNumPatterns && remaining > 0; ++pattern) {
    const double p = table.p[pattern];
    if (p <= 0.0) continue;
    const double cond = std::min(1.0, p / mass);
    std::binomial_distribution<std::int64_t> binom(remaining, cond);
    const std::int64_t n = cond >= 1.0 ? remaining : binom(rng);
    counts[pattern] = n;
    remaining -= n;
    mass -= p;
    if (mass <= 0.0) break;
  }
  counts[0] = remaining;
  return counts;
}

}  // namespace stimclone::detection
