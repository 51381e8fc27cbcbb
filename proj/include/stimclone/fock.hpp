#pragma once

// Sparse bosonic Fock-space states over a fixed registry of optical modes,
// with creation/annihilation operators and inner-product algebra.
//
// States are kept as ordered maps from occupation tuples to complex
// amplitudes. The experiments modeled here never populate more than a few
// dozen tuples, so a sparse map wins over dense vectors by a wide margin and
// keeps iteration order deterministic.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "stimclone/errors.hpp"

namespace stimclone {

using Complex = std::complex<double>;

// Every tolerance used by the library, in one place.
struct Tolerances {
  double unitarity = 1e-12;        // max |U†U - I| entry for transforms
  double norm = 1e-12;             // normalization checks
  double prune = 1e-14;            // amplitudes below this are dropped
  double probability_sum = 1e-12;  // outcome-table closure checks
};

namespace fock {

enum class Pol : std::uint8_t { V = 0, H = 1 };

inline const char* pol_name(Pol p) { return p == Pol::V ? "v" : "h"; }

// Spatial channel of a mode. A and B are the two down-conversion directions;
// InputOrtho is the part of the injected wavepacket that does not overlap the
// down-conversion mode in A. Loss and Port channels are ancillas introduced
// by lossy elements and beam-splitter output arms; `index` distinguishes
// multiple ancillas of the same kind.
struct SpatialLabel {
  enum class Kind : std::uint8_t { A, B, InputOrtho, Loss, Port };

  Kind kind{Kind::A};
  std::uint8_t index{0};

  friend bool operator==(const SpatialLabel&, const SpatialLabel&) = default;

  std::string name() const {
    switch (kind) {
      case Kind::A:
        return "a";
      case Kind::B:
        return "b";
      case Kind::InputOrtho:
        return "c";
      case Kind::Loss:
        return "loss" + std::to_string(index);
      case Kind::Port:
        return "port" + std::to_string(index);
    }
    return "?";
  }
};

inline constexpr SpatialLabel kChannelA{SpatialLabel::Kind::A, 0};
inline constexpr SpatialLabel kChannelB{SpatialLabel::Kind::B, 0};
inline constexpr SpatialLabel kChannelC{SpatialLabel::Kind::InputOrtho, 0};

inline SpatialLabel loss_channel(std::uint8_t index) {
  return SpatialLabel{SpatialLabel::Kind::Loss, index};
}
inline SpatialLabel port_channel(std::uint8_t index) {
  return SpatialLabel{SpatialLabel::Kind::Port, index};
}

struct ModeId {
  std::uint32_t value{0};
  friend auto operator<=>(const ModeId&, const ModeId&) = default;
};

struct ModeSpec {
  SpatialLabel spatial;
  Pol pol;
};

// Ordered list of modes; the order fixes the occupation-tuple layout for the
// lifetime of a run. States referencing different registry objects never mix.
class ModeRegistry {
 public:
  explicit ModeRegistry(std::vector<ModeSpec> modes, int max_total_photons = 6,
                        Tolerances tol = {})
      : modes_(std::move(modes)), max_total_photons_(max_total_photons), tol_(tol) {
    if (modes_.empty()) {
      throw ConfigError("mode registry must not be empty");
    }
    if (max_total_photons_ < 1) {
      throw ConfigError("max_total_photons must be at least 1");
    }
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      for (std::size_t j = i + 1; j < modes_.size(); ++j) {
        if (modes_[i].spatial == modes_[j].spatial && modes_[i].pol == modes_[j].pol) {
          throw ConfigError("duplicate mode in registry: " + mode_name(ModeId{static_cast<std::uint32_t>(i)}));
        }
      }
    }
  }

  std::size_t size() const { return modes_.size(); }
  int max_total_photons() const { return max_total_photons_; }
  const Tolerances& tolerances() const { return tol_; }

  const ModeSpec& spec(ModeId m) const { return modes_.at(m.value); }

  std::optional<ModeId> find(SpatialLabel spatial, Pol pol) const {
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (modes_[i].spatial == spatial && modes_[i].pol == pol) {
        return ModeId{static_cast<std::uint32_t>(i)};
      }
    }
    return std::nullopt;
  }

  ModeId id(SpatialLabel spatial, Pol pol) const {
    if (auto m = find(spatial, pol)) return *m;
    throw UsageError("mode " + spatial.name() + "_" + pol_name(pol) + " is not registered");
  }

  // Both polarization modes of a spatial channel, in registry order.
  std::vector<ModeId> channel_modes(SpatialLabel spatial) const {
    std::vector<ModeId> out;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (modes_[i].spatial == spatial) out.push_back(ModeId{static_cast<std::uint32_t>(i)});
    }
    return out;
  }

  std::string mode_name(ModeId m) const {
    const ModeSpec& s = spec(m);
    return s.spatial.name() + "_" + pol_name(s.pol);
  }

 private:
  std::vector<ModeSpec> modes_;
  int max_total_photons_;
  Tolerances tol_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;

using Occupation = std::vector<std::uint8_t>;

inline int total_photons(const Occupation& occ) {
  return std::accumulate(occ.begin(), occ.end(), 0);
}

inline int photons_in(const Occupation& occ, const std::vector<ModeId>& modes) {
  int n = 0;
  for (ModeId m : modes) n += occ[m.value];
  return n;
}

inline std::string occupation_to_string(const Occupation& occ) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < occ.size(); ++i) {
    if (i) os << ",";
    os << static_cast<int>(occ[i]);
  }
  os << ")";
  return os.str();
}

// Sparse superposition of occupation-number basis states.
class FockState {
 public:
  using TermMap = std::map<Occupation, Complex>;

  explicit FockState(RegistryPtr registry) : registry_(std::move(registry)) {
    if (!registry_) throw UsageError("FockState requires a registry");
  }

  static FockState vacuum(RegistryPtr registry) {
    FockState s(std::move(registry));
    s.terms_[Occupation(s.registry_->size(), 0)] = Complex{1.0, 0.0};
    return s;
  }

  const TermMap& terms() const { return terms_; }
  const RegistryPtr& registry() const { return registry_; }
  std::size_t num_modes() const { return registry_->size(); }
  bool is_zero() const { return terms_.empty(); }

  Complex amplitude(const Occupation& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Complex{0.0, 0.0} : it->second;
  }

  // Accumulates into an existing tuple; drops the term if it cancels out.
  void add_term(const Occupation& occ, Complex amp) {
    if (occ.size() != registry_->size()) {
      throw UsageError("occupation tuple has wrong dimension");
    }
    auto [it, inserted] = terms_.try_emplace(occ, amp);
    if (!inserted) {
      it->second += amp;
      if (std::abs(it->second) <= registry_->tolerances().prune) terms_.erase(it);
    } else if (std::abs(amp) <= registry_->tolerances().prune) {
      terms_.erase(it);
    }
  }

  void prune() {
    const double threshold = registry_->tolerances().prune;
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= threshold) {
        it = terms_.erase(it);
      } else {
        ++it;
      }
    }
  }

  double norm_squared() const {
    double n = 0.0;
    for (const auto& [occ, amp] : terms_) n += std::norm(amp);
    return n;
  }

  double norm() const { return std::sqrt(norm_squared()); }

 private:
  RegistryPtr registry_;
  TermMap terms_;
};

inline void require_same_registry(const FockState& a, const FockState& b) {
  if (a.registry().get() != b.registry().get()) {
    throw UsageError("states belong to different mode registries");
  }
}

inline FockState make_vacuum(RegistryPtr registry) { return FockState::vacuum(std::move(registry)); }

// a†_m: each term picks up sqrt(n_m + 1). Throws if the total photon number
// would exceed the registry cutoff.
inline FockState create(const FockState& state, ModeId m) {
  const ModeRegistry& reg = *state.registry();
  if (m.value >= reg.size()) throw UsageError("create: mode not registered");
  FockState out(state.registry());
  for (const auto& [occ, amp] : state.terms()) {
    if (total_photons(occ) + 1 > reg.max_total_photons()) {
      throw TruncationError("create on " + reg.mode_name(m) + " exceeds photon cutoff " +
                                std::to_string(reg.max_total_photons()) + " at tuple " +
                                occupation_to_string(occ),
                            occ);
    }
    Occupation next = occ;
    next[m.value] += 1;
    out.add_term(next, amp * std::sqrt(static_cast<double>(next[m.value])));
  }
  return out;
}

// a_m: each term picks up sqrt(n_m); terms with n_m = 0 vanish. Annihilating
// the vacuum therefore yields the (valid) zero state.
inline FockState annihilate(const FockState& state, ModeId m) {
  const ModeRegistry& reg = *state.registry();
  if (m.value >= reg.size()) throw UsageError("annihilate: mode not registered");
  FockState out(state.registry());
  for (const auto& [occ, amp] : state.terms()) {
    if (occ[m.value] == 0) continue;
    Occupation next = occ;
    next[m.value] -= 1;
    out.add_term(next, amp * std::sqrt(static_cast<double>(occ[m.value])));
  }
  return out;
}

inline Complex inner_product(const FockState& bra, const FockState& ket) {
  require_same_registry(bra, ket);
  // Iterate the smaller map, look up in the larger one.
  const auto& small = bra.terms().size() <= ket.terms().size() ? bra : ket;
  const auto& large = bra.terms().size() <= ket.terms().size() ? ket : bra;
  const bool small_is_bra = &small == &bra;
  Complex acc{0.0, 0.0};
  for (const auto& [occ, amp] : small.terms()) {
    auto it = large.terms().find(occ);
    if (it == large.terms().end()) continue;
    acc += small_is_bra ? std::conj(amp) * it->second : std::conj(it->second) * amp;
  }
  return acc;
}

inline FockState operator*(Complex scalar, const FockState& state) {
  FockState out(state.registry());
  if (std::abs(scalar) == 0.0) return out;
  for (const auto& [occ, amp] : state.terms()) out.add_term(occ, scalar * amp);
  return out;
}

inline FockState operator*(double scalar, const FockState& state) {
  return Complex{scalar, 0.0} * state;
}

inline FockState operator+(const FockState& a, const FockState& b) {
  require_same_registry(a, b);
  FockState out(a.registry());
  for (const auto& [occ, amp] : a.terms()) out.add_term(occ, amp);
  for (const auto& [occ, amp] : b.terms()) out.add_term(occ, amp);
  return out;
}

inline FockState operator-(const FockState& a, const FockState& b) {
  return a + (Complex{-1.0, 0.0} * b);
}

inline FockState normalize(const FockState& state) {
  const double n = state.norm();
  if (n <= 0.0) throw NumericalError("cannot normalize the zero state");
  return Complex{1.0 / n, 0.0} * state;
}

inline bool is_normalized(const FockState& state) {
  return std::abs(state.norm_squared() - 1.0) <= state.registry()->tolerances().norm;
}

struct ProjectionResult {
  double probability = 0.0;
  std::optional<FockState> conditional;  // renormalized; empty if probability is 0
};

// Projects onto the span of tuples matched by `pattern` and renormalizes.
// This is how heralding on the trigger photon is implemented.
inline ProjectionResult project_pattern(const FockState& state,
                                        const std::function<bool(const Occupation&)>& pattern) {
  if (state.is_zero()) throw NumericalError("cannot project the zero state");
  FockState kept(state.registry());
  double prob = 0.0;
  for (const auto& [occ, amp] : state.terms()) {
    if (!pattern(occ)) continue;
    prob += std::norm(amp);
    kept.add_term(occ, amp);
  }
  prob /= state.norm_squared();
  ProjectionResult result;
  result.probability = prob;
  if (prob > 0.0 && !kept.is_zero()) result.conditional = normalize(kept);
  return result;
}

}  // namespace fock
}  // namespace stimclone
