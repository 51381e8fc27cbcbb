#pragma once

// The cloning interaction: perturbative evolution under the two-mode
// parametric down-conversion Hamiltonian
//
//   H = kappa (a†_v b†_h - e^{i phi} a†_h b†_v) + h.c.
//
// applied to an injected photon that overlaps the down-conversion mode a with
// amplitude gamma; the non-overlapping remainder lives in the InputOrtho
// channel c. phi = 0 is the phase-stable case; nonzero dephasing averages
// over a symmetric grid of phases, which degrades the a-b polarization
// correlation without touching the clone statistics.

#include <cmath>
#include <iostream>
#include <vector>

#include "stimclone/fock.hpp"
#include "stimclone/jones.hpp"
#include "stimclone/optics.hpp"

namespace stimclone::pdc {

using fock::FockState;
using fock::kChannelA;
using fock::kChannelB;
using fock::kChannelC;
using fock::ModeRegistry;
using fock::Pol;
using fock::RegistryPtr;
using optics::ModeTransform;

// kappa_t 0.0316 makes the first-order pair probability about 1e-3.
inline constexpr double kDefaultKappaT = 0.03162277660168379;

struct PdcConfig {
  double kappa_t = kDefaultKappaT;
  int order = 1;        // Taylor order of e^{-iHt}; 0, 1 or 2
  double dephasing = 0.0;  // 0 = fixed phase, 1 = fully randomized

  void validate() const {
    if (order < 0 || order > 2) throw ConfigError("pdc.order must be 0, 1 or 2");
    if (dephasing < 0.0 || dephasing > 1.0) throw ConfigError("pdc.dephasing must lie in [0,1]");
    if (std::abs(kappa_t) > 0.1) {
      std::cerr << "warning: pdc.kappa_t = " << kappa_t
                << " is outside the perturbative regime (|kappa_t| <= 0.1)\n";
    }
  }
};

struct PhotonNumberDistribution {
  enum class Kind { ExactlyOne, Poisson };
  Kind kind = Kind::ExactlyOne;
  double mean = 0.0;  // Poisson only

  static PhotonNumberDistribution exactly_one() { return {Kind::ExactlyOne, 0.0}; }
  static PhotonNumberDistribution poisson(double mean) { return {Kind::Poisson, mean}; }
};

struct InputSpec {
  Jones polarization = jones_v();
  double gamma = 1.0;  // overlap with the down-conversion mode a
  PhotonNumberDistribution photon_number = PhotonNumberDistribution::exactly_one();

  void validate() const {
    if (std::abs(jones_norm(polarization) - 1.0) > 1e-12) {
      throw ConfigError("input.polarization must be a unit Jones vector");
    }
    if (gamma < 0.0 || gamma > 1.0) throw ConfigError("input.gamma must lie in [0,1]");
    if (photon_number.kind == PhotonNumberDistribution::Kind::Poisson && photon_number.mean < 0.0) {
      throw ConfigError("input.photon_number mean must be >= 0");
    }
  }
};

// Registry for source-only work: channels a, b and c, in fixed order.
inline RegistryPtr make_source_registry(int max_total_photons = 6, Tolerances tol = {}) {
  using fock::ModeSpec;
  std::vector<ModeSpec> modes;
  for (auto ch : {kChannelA, kChannelB, kChannelC}) {
    modes.push_back({ch, Pol::V});
    modes.push_back({ch, Pol::H});
  }
  return std::make_shared<const ModeRegistry>(std::move(modes), max_total_photons, tol);
}

// H / kappa with relative phase `phase` between the two pair terms:
//   a†_v b†_h - e^{i phase} a†_h b†_v + a_v b_h - e^{-i phase} a_h b_v
inline FockState hamiltonian_apply(const FockState& state, double phase = 0.0) {
  const ModeRegistry& reg = *state.registry();
  const auto av = reg.id(kChannelA, Pol::V), ah = reg.id(kChannelA, Pol::H);
  const auto bv = reg.id(kChannelB, Pol::V), bh = reg.id(kChannelB, Pol::H);
  const Complex ephase = std::exp(kI * phase);

  FockState out = create(create(state, bh), av);
  out = out + (-ephase) * create(create(state, bv), ah);
  out = out + annihilate(annihilate(state, bh), av);
  out = out + (-std::conj(ephase)) * annihilate(annihilate(state, bv), ah);
  out.prune();
  return out;
}

// n input photons, all in the wavepacket mode
//   ã†_pol = gamma a†_pol + sqrt(1 - gamma^2) c†_pol
// with the given polarization. n = 0 gives the vacuum layer of a weak pulse.
inline FockState input_layer(const InputSpec& spec, RegistryPtr registry, int n) {
  spec.validate();
  if (n < 0 || n > 2) throw UsageError("input_layer supports 0, 1 or 2 photons");
  const ModeRegistry& reg = *registry;
  const double ortho = std::sqrt(std::max(0.0, 1.0 - spec.gamma * spec.gamma));
  FockState photon_added = make_vacuum(registry);
  for (int k = 0; k < n; ++k) {
    FockState next(registry);
    for (Pol pol : {Pol::V, Pol::H}) {
      const Complex amp = pol == Pol::V ? spec.polarization[0] : spec.polarization[1];
      if (std::abs(amp) == 0.0) continue;
      if (spec.gamma != 0.0) {
        next = next + (amp * spec.gamma) * create(photon_added, reg.id(kChannelA, pol));
      }
      if (ortho != 0.0) {
        next = next + (amp * ortho) * create(photon_added, reg.id(kChannelC, pol));
      }
    }
    photon_added = next;
  }
  // (ã†)^n |0> has norm sqrt(n!): renormalize the layer.
  if (n == 2) photon_added = (1.0 / std::sqrt(2.0)) * photon_added;
  photon_added.prune();
  return photon_added;
}

// The single-photon injected state; weak-pulse layers are handled by the
// experiment module via input_layer + poisson_layer_weights.
inline FockState inject_input(const InputSpec& spec, RegistryPtr registry) {
  return input_layer(spec, std::move(registry), 1);
}

// Weights of the 0-, 1- and 2-photon layers of a phase-averaged weak pulse,
// renormalized over the truncation (P(n >= 3) < 2.1e-5 at mean 0.05).
inline std::array<double, 3> poisson_layer_weights(double mean) {
  if (mean < 0.0) throw ConfigError("poisson mean must be >= 0");
  std::array<double, 3> w{1.0, mean, mean * mean / 2.0};
  const double z = w[0] + w[1] + w[2];
  for (double& x : w) x /= z;
  return w;
}

// Sum_{k<=order} (-i kappa t)^k / k! H̃^k |input>, merged coherently.
// Unnormalized: the zeroth-order term keeps amplitude 1.
inline FockState evolve(const FockState& input, const PdcConfig& cfg, double phase = 0.0) {
  cfg.validate();
  FockState acc = input;
  FockState power = input;
  Complex coef{1.0, 0.0};
  for (int k = 1; k <= cfg.order; ++k) {
    power = hamiltonian_apply(power, phase);
    coef *= -kI * cfg.kappa_t / static_cast<double>(k);
    acc = acc + coef * power;
  }
  acc.prune();
  return acc;
}

// Symmetric phase grid for classical dephasing averaging. dephasing = 0
// collapses to the single fixed phase 0; dephasing = 1 spreads the eight
// phases over (-pi, pi), killing the a-b coherence on average.
inline std::vector<double> dephasing_phases(double dephasing) {
  if (dephasing == 0.0) return {0.0};
  std::vector<double> phases;
  phases.reserve(8);
  for (int k = 0; k < 8; ++k) {
    phases.push_back(dephasing * M_PI * (2.0 * k - 7.0) / 8.0);
  }
  return phases;
}

struct WeightedState {
  double weight;
  FockState state;
};

// Classical ensemble over the dephasing phase grid.
inline std::vector<WeightedState> evolve_dephased(const FockState& input, const PdcConfig& cfg) {
  const std::vector<double> phases = dephasing_phases(cfg.dephasing);
  std::vector<WeightedState> out;
  out.reserve(phases.size());
  const double w = 1.0 / static_cast<double>(phases.size());
  for (double phi : phases) out.push_back({w, evolve(input, cfg, phi)});
  return out;
}

// The same Jones unitary applied simultaneously to channels a, b and c.
// With det(U) = 1 this commutes with the evolution exactly, which is the
// operational statement that cloning quality is basis-independent.
inline ModeTransform joint_rotation(const ModeRegistry& reg, const JonesMatrix& jones) {
  if (!jones_is_unitary(jones, Tolerances{}.unitarity)) {
    throw ConfigError("joint_rotation requires a unitary Jones matrix");
  }
  ModeTransform t;
  std::vector<fock::SpatialLabel> channels;
  for (auto ch : {kChannelA, kChannelB, kChannelC}) {
    if (reg.find(ch, Pol::V)) channels.push_back(ch);
  }
  for (auto ch : channels) {
    t.modes.push_back(reg.id(ch, Pol::V));
    t.modes.push_back(reg.id(ch, Pol::H));
  }
  const std::size_t n = t.modes.size();
  t.matrix.assign(n * n, Complex{0, 0});
  for (std::size_t blk = 0; blk < channels.size(); ++blk) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) t.matrix[(2 * blk + i) * n + (2 * blk + j)] = jones[i][j];
    }
  }
  t.label = "joint_rotation";
  return t;
}

}  // namespace stimclone::pdc
