#pragma once

// Linear-optical elements as unitary transforms on creation operators:
// a†_i -> sum_j U_ji a†_j over a subset of registered modes.
//
// Lossy elements (the polarizer) are written as unitaries over an extended
// mode set with explicit Loss channels, so probability bookkeeping stays in
// one mechanism. Beam-splitter second arms are explicit Port channels.

#include <cmath>
#include <string>
#include <vector>

#include "stimclone/fock.hpp"
#include "stimclone/jones.hpp"

namespace stimclone::optics {

using fock::FockState;
using fock::ModeId;
using fock::ModeRegistry;
using fock::Occupation;
using fock::Pol;
using fock::SpatialLabel;

// Dense complex matrix over an ordered subset of modes. Column i holds the
// image of a†_{modes[i]}.
struct ModeTransform {
  std::vector<ModeId> modes;
  std::vector<Complex> matrix;  // row-major, size modes.size()^2
  std::string label;

  std::size_t dim() const { return modes.size(); }
  Complex at(std::size_t row, std::size_t col) const { return matrix[row * dim() + col]; }
  Complex& at(std::size_t row, std::size_t col) { return matrix[row * dim() + col]; }

  static ModeTransform identity(std::vector<ModeId> modes, std::string label = "identity") {
    ModeTransform t;
    t.modes = std::move(modes);
    t.matrix.assign(t.modes.size() * t.modes.size(), Complex{0, 0});
    for (std::size_t i = 0; i < t.modes.size(); ++i) t.at(i, i) = Complex{1, 0};
    t.label = std::move(label);
    return t;
  }
};

inline double unitarity_defect(const ModeTransform& t) {
  const std::size_t n = t.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc{0, 0};
      for (std::size_t k = 0; k < n; ++k) acc += std::conj(t.at(k, i)) * t.at(k, j);
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(acc - target));
    }
  }
  return worst;
}

inline bool is_unitary(const ModeTransform& t, double tol) { return unitarity_defect(t) <= tol; }

inline void require_unitary(const ModeTransform& t, double tol) {
  if (!is_unitary(t, tol)) {
    throw ConfigError("transform '" + t.label + "' is not unitary (defect " +
                      std::to_string(unitarity_defect(t)) + ")");
  }
}

// second ∘ first, over the union of their mode sets.
inline ModeTransform compose(const ModeTransform& second, const ModeTransform& first) {
  std::vector<ModeId> modes = first.modes;
  for (ModeId m : second.modes) {
    if (std::find(modes.begin(), modes.end(), m) == modes.end()) modes.push_back(m);
  }
  auto index_of = [&modes](ModeId m) {
    return static_cast<std::size_t>(std::find(modes.begin(), modes.end(), m) - modes.begin());
  };
  const std::size_t n = modes.size();
  auto embed = [&](const ModeTransform& t) {
    std::vector<Complex> full(n * n, Complex{0, 0});
    for (std::size_t i = 0; i < n; ++i) full[i * n + i] = Complex{1, 0};
    for (std::size_t r = 0; r < t.dim(); ++r) {
      for (std::size_t c = 0; c < t.dim(); ++c) {
        full[index_of(t.modes[r]) * n + index_of(t.modes[c])] = t.at(r, c);
      }
    }
    return full;
  };
  const std::vector<Complex> a = embed(second);
  const std::vector<Complex> b = embed(first);
  ModeTransform out;
  out.modes = std::move(modes);
  out.matrix.assign(n * n, Complex{0, 0});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc{0, 0};
      for (std::size_t k = 0; k < n; ++k) acc += a[i * n + k] * b[k * n + j];
      out.matrix[i * n + j] = acc;
    }
  }
  out.label = second.label + "*" + first.label;
  return out;
}

// Rewrites every creation operator of the state through the transform. Each
// input tuple is factored into (a†)^n products, each a† substituted by its
// image, and the resulting polynomial re-expanded onto occupation tuples.
// Unitarity is enforced up front, so the norm is preserved.
inline FockState apply_transform(const FockState& state, const ModeTransform& t) {
  const ModeRegistry& reg = *state.registry();
  require_unitary(t, reg.tolerances().unitarity);
  for (ModeId m : t.modes) {
    if (m.value >= reg.size()) throw UsageError("transform touches unregistered mode");
  }

  FockState out(state.registry());
  using Partial = std::map<Occupation, Complex>;
  for (const auto& [occ, amp] : state.terms()) {
    // Factor out the occupations on the transform's modes.
    double fact = 1.0;
    Occupation base = occ;
    for (ModeId m : t.modes) {
      for (int k = 2; k <= occ[m.value]; ++k) fact *= k;  // n!
      base[m.value] = 0;
    }
    Partial partial{{base, amp / std::sqrt(fact)}};
    for (std::size_t col = 0; col < t.dim(); ++col) {
      const int n = occ[t.modes[col].value];
      for (int rep = 0; rep < n; ++rep) {
        Partial next;
        for (const auto& [tup, a] : partial) {
          for (std::size_t row = 0; row < t.dim(); ++row) {
            const Complex u = t.at(row, col);
            if (u == Complex{0, 0}) continue;
            Occupation grown = tup;
            const std::uint8_t& cur = grown[t.modes[row].value];
            grown[t.modes[row].value] = static_cast<std::uint8_t>(cur + 1);
            const double boson = std::sqrt(static_cast<double>(grown[t.modes[row].value]));
            next[grown] += a * u * boson;
          }
        }
        partial = std::move(next);
      }
    }
    for (const auto& [tup, a] : partial) out.add_term(tup, a);
  }
  out.prune();
  return out;
}

// -- Element constructors ---------------------------------------------------

// Any 2x2 Jones unitary acting on the (v, h) pair of one spatial channel.
inline ModeTransform jones_element(const ModeRegistry& reg, SpatialLabel channel,
                                   const JonesMatrix& m, std::string label) {
  ModeTransform t;
  t.modes = {reg.id(channel, Pol::V), reg.id(channel, Pol::H)};
  t.matrix = {m[0][0], m[0][1], m[1][0], m[1][1]};
  t.label = std::move(label);
  return t;
}

inline ModeTransform half_wave_plate(const ModeRegistry& reg, SpatialLabel channel, double angle) {
  return jones_element(reg, channel, hwp_matrix(angle), "hwp(" + channel.name() + ")");
}

inline ModeTransform quarter_wave_plate(const ModeRegistry& reg, SpatialLabel channel,
                                        double angle) {
  return jones_element(reg, channel, qwp_matrix(angle), "qwp(" + channel.name() + ")");
}

// Two-port beam splitter between channels `in` and `port`, acting identically
// on both polarizations; reflection carries the usual factor i.
inline ModeTransform beam_splitter(const ModeRegistry& reg, SpatialLabel in, SpatialLabel port,
                                   double reflectivity) {
  if (reflectivity < 0.0 || reflectivity > 1.0) {
    throw ConfigError("beam splitter reflectivity must lie in [0,1]");
  }
  const double r = std::sqrt(reflectivity);
  const double tr = std::sqrt(1.0 - reflectivity);
  ModeTransform t;
  t.modes = {reg.id(in, Pol::V), reg.id(in, Pol::H), reg.id(port, Pol::V), reg.id(port, Pol::H)};
  t.matrix.assign(16, Complex{0, 0});
  for (int p = 0; p < 2; ++p) {  // per polarization block
    t.at(p, p) = Complex{tr, 0};
    t.at(p + 2, p) = kI * r;
    t.at(p, p + 2) = kI * r;
    t.at(p + 2, p + 2) = Complex{tr, 0};
  }
  t.label = "bs(" + in.name() + "," + port.name() + ")";
  return t;
}

// Polarizing beam splitter: v transmits (stays in `in`), h reflects into
// `port`. Output port 1 is the transmitted channel, output port 2 the
// reflected one.
inline ModeTransform pbs(const ModeRegistry& reg, SpatialLabel in, SpatialLabel port) {
  ModeTransform t = ModeTransform::identity(
      {reg.id(in, Pol::V), reg.id(in, Pol::H), reg.id(port, Pol::V), reg.id(port, Pol::H)});
  t.at(1, 1) = Complex{0, 0};
  t.at(3, 3) = Complex{0, 0};
  t.at(3, 1) = Complex{1, 0};  // in_h -> port_h
  t.at(1, 3) = Complex{1, 0};
  t.label = "pbs(" + in.name() + "," + port.name() + ")";
  return t;
}

// Polarizer with pass axis at `angle` from v. The pass component stays in the
// channel; the rejected component is routed into the loss channel, keeping
// the transform unitary.
inline ModeTransform polarizer(const ModeRegistry& reg, SpatialLabel channel, SpatialLabel loss,
                               double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  ModeTransform t;
  t.modes = {reg.id(channel, Pol::V), reg.id(channel, Pol::H), reg.id(loss, Pol::V),
             reg.id(loss, Pol::H)};
  t.matrix.assign(16, Complex{0, 0});
  // Basis change W maps (v,h) -> (pass, reject); the reject component of the
  // signal channel swaps with the loss channel, then W is undone.
  const double w[2][2] = {{c, s}, {-s, c}};
  double u[4][4] = {};
  // B = blockdiag(W, W); S swaps rows 1<->3 (reject_signal <-> reject_loss);
  // U = Bᵀ S B, all real orthogonal.
  double b[4][4] = {};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      b[i][j] = w[i][j];
      b[i + 2][j + 2] = w[i][j];
    }
  }
  double sb[4][4] = {};
  for (int j = 0; j < 4; ++j) {
    sb[0][j] = b[0][j];
    sb[1][j] = b[3][j];
    sb[2][j] = b[2][j];
    sb[3][j] = b[1][j];
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += b[k][i] * sb[k][j];
      u[i][j] = acc;
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) t.at(i, j) = Complex{u[i][j], 0};
  }
  t.label = "polarizer(" + channel.name() + ")";
  return t;
}

// -- Temporal overlap --------------------------------------------------------

// Gaussian wavepacket widths for the injected photon and the down-conversion
// mode. The mode-overlap magnitude gamma follows from the standard Gaussian
// overlap integral; the widths are free parameters of the model.
struct OverlapModel {
  double sigma_input_fs = 120.0;
  double sigma_dc_fs = 42.553308073493916;  // gamma(0)^2 = 0.63

  void validate() const {
    if (!(sigma_input_fs > 0.0)) throw ConfigError("overlap.sigma_input_fs must be > 0");
    if (!(sigma_dc_fs > 0.0)) throw ConfigError("overlap.sigma_dc_fs must be > 0");
  }

  double combined_width_fs() const {
    return std::sqrt(sigma_input_fs * sigma_input_fs + sigma_dc_fs * sigma_dc_fs);
  }
};

// gamma(tau) = sqrt(2 s1 s2 / (s1^2 + s2^2)) * exp(-tau^2 / (2 (s1^2 + s2^2)))
inline double overlap_gamma(const OverlapModel& model, double delay_fs) {
  model.validate();
  const double s1 = model.sigma_input_fs, s2 = model.sigma_dc_fs;
  const double ss = s1 * s1 + s2 * s2;
  return std::sqrt(2.0 * s1 * s2 / ss) * std::exp(-delay_fs * delay_fs / (2.0 * ss));
}

}  // namespace stimclone::optics
