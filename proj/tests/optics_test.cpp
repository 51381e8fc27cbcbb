#include "stimclone/optics.hpp"

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace stimclone;
using namespace stimclone::fock;
using namespace stimclone::optics;
using stimclone::testutil::expect_complex_near;
using stimclone::testutil::random_state;

namespace {

RegistryPtr optics_registry(int cutoff = 6) {
  std::vector<ModeSpec> modes;
  for (auto ch : {kChannelA, port_channel(0), loss_channel(0)}) {
    modes.push_back({ch, Pol::V});
    modes.push_back({ch, Pol::H});
  }
  return std::make_shared<const ModeRegistry>(std::move(modes), cutoff);
}

// Gaussian overlap by Simpson quadrature, independent of the closed form.
double overlap_by_quadrature(double s1, double s2, double tau) {
  auto packet = [](double sigma, double t) {
    return std::pow(M_PI * sigma * sigma, -0.25) * std::exp(-t * t / (2.0 * sigma * sigma));
  };
  const double lo = -3000.0, hi = 3000.0;
  const int n = 60000;  // even
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * packet(s1, t) * packet(s2, t - tau);
  }
  return acc * h / 3.0;
}

TEST(ModeTransformTest, IdentityLeavesStateUnchanged) {
  auto reg = optics_registry();
  std::mt19937_64 rng(3);
  const FockState psi = random_state(reg, rng);
  const auto id = ModeTransform::identity({ModeId{0}, ModeId{1}, ModeId{2}});
  EXPECT_LT((apply_transform(psi, id) - psi).norm(), 1e-14);
}

TEST(ModeTransformTest, NonUnitaryRejected) {
  auto reg = optics_registry();
  ModeTransform bad = ModeTransform::identity({ModeId{0}, ModeId{1}});
  bad.at(0, 0) = Complex{0.5, 0};
  EXPECT_THROW(apply_transform(make_vacuum(reg), bad), ConfigError);
}

TEST(ModeTransformTest, PreservesNorm) {
  auto reg = optics_registry();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const FockState psi = random_state(reg, rng);
    const auto bs = beam_splitter(*reg, kChannelA, port_channel(0), 0.3);
    EXPECT_NEAR(apply_transform(psi, bs).norm_squared(), psi.norm_squared(), 1e-12);
  }
}

TEST(ModeTransformTest, CompositionMatchesSequentialApplication) {
  auto reg = optics_registry();
  std::mt19937_64 rng(9);
  const auto t1 = beam_splitter(*reg, kChannelA, port_channel(0), 0.25);
  const auto t2 = half_wave_plate(*reg, kChannelA, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const FockState psi = random_state(reg, rng);
    const FockState seq = apply_transform(apply_transform(psi, t1), t2);
    const FockState composed = apply_transform(psi, compose(t2, t1));
    EXPECT_LT((seq - composed).norm(), 1e-12);
  }
}

TEST(BeamSplitterTest, HomDipExactZero) {
  auto reg = optics_registry();
  for (Pol pol : {Pol::V, Pol::H}) {
    const FockState pair = create(create(make_vacuum(reg), reg->id(kChannelA, pol)),
                                  reg->id(port_channel(0), pol));
    const auto out = apply_transform(pair, beam_splitter(*reg, kChannelA, port_channel(0), 0.5));
    Occupation coincidence(reg->size(), 0);
    coincidence[reg->id(kChannelA, pol).value] = 1;
    coincidence[reg->id(port_channel(0), pol).value] = 1;
    EXPECT_EQ(std::abs(out.amplitude(coincidence)), 0.0);
  }
}

TEST(BeamSplitterTest, BunchedPairSplitsHalfTheTime) {
  auto reg = optics_registry();
  const auto av = reg->id(kChannelA, Pol::V);
  const FockState two = create(create(make_vacuum(reg), av), av);
  const auto out = apply_transform(normalize(two), beam_splitter(*reg, kChannelA, port_channel(0), 0.5));
  Occupation split(reg->size(), 0);
  split[av.value] = 1;
  split[reg->id(port_channel(0), Pol::V).value] = 1;
  EXPECT_NEAR(std::norm(out.amplitude(split)), 0.5, 1e-12);
}

TEST(WaveplateTest, HalfWaveAtZeroFlipsH) {
  auto reg = optics_registry();
  const auto hwp = half_wave_plate(*reg, kChannelA, 0.0);
  const FockState v = create(make_vacuum(reg), reg->id(kChannelA, Pol::V));
  const FockState h = create(make_vacuum(reg), reg->id(kChannelA, Pol::H));
  expect_complex_near(inner_product(v, apply_transform(v, hwp)), {1, 0}, 1e-15);
  expect_complex_near(inner_product(h, apply_transform(h, hwp)), {-1, 0}, 1e-15);
}

TEST(WaveplateTest, HalfWaveAt22p5RotatesVToDiagonal) {
  auto reg = optics_registry();
  const auto hwp = half_wave_plate(*reg, kChannelA, M_PI / 8.0);
  const FockState v = create(make_vacuum(reg), reg->id(kChannelA, Pol::V));
  const FockState out = apply_transform(v, hwp);
  const double s = 1.0 / std::sqrt(2.0);
  Occupation occ_v(reg->size(), 0), occ_h(reg->size(), 0);
  occ_v[reg->id(kChannelA, Pol::V).value] = 1;
  occ_h[reg->id(kChannelA, Pol::H).value] = 1;
  expect_complex_near(out.amplitude(occ_v), {s, 0}, 1e-15);
  expect_complex_near(out.amplitude(occ_h), {s, 0}, 1e-15);
}

TEST(WaveplateTest, QuarterWaveAt45MakesCircularLinear) {
  // Oracle: brute-force Jones product.
  const Jones out = jones_apply(qwp_matrix(M_PI / 4.0), jones_circ_left());
  EXPECT_NEAR(std::abs(out[0]), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(out[1]), 0.0, 1e-12);

  auto reg = optics_registry();
  const auto qwp = quarter_wave_plate(*reg, kChannelA, M_PI / 4.0);
  const Jones in = jones_circ_left();
  FockState circ(reg);
  circ = in[0] * create(make_vacuum(reg), reg->id(kChannelA, Pol::V)) +
         in[1] * create(make_vacuum(reg), reg->id(kChannelA, Pol::H));
  const FockState rotated = apply_transform(circ, qwp);
  Occupation occ_h(reg->size(), 0);
  occ_h[reg->id(kChannelA, Pol::H).value] = 1;
  EXPECT_NEAR(std::abs(rotated.amplitude(occ_h)), 0.0, 1e-12);
}

TEST(PbsTest, OppositePolarizationsSplitDeterministically) {
  auto reg = optics_registry();
  const FockState pair = create(create(make_vacuum(reg), reg->id(kChannelA, Pol::V)),
                                reg->id(kChannelA, Pol::H));
  const auto out = apply_transform(pair, pbs(*reg, kChannelA, port_channel(0)));
  Occupation expected(reg->size(), 0);
  expected[reg->id(kChannelA, Pol::V).value] = 1;        // port 1: transmitted v
  expected[reg->id(port_channel(0), Pol::H).value] = 1;  // port 2: reflected h
  EXPECT_NEAR(std::norm(out.amplitude(expected)), 1.0, 1e-15);
}

TEST(PolarizerTest, MalusLawAtSinglePhotonLevel) {
  auto reg = optics_registry();
  const auto transmitted = [&](Pol pol, double angle) {
    const FockState in = create(make_vacuum(reg), reg->id(kChannelA, pol));
    const auto out = apply_transform(in, polarizer(*reg, kChannelA, loss_channel(0), angle));
    const auto keep = reg->channel_modes(kChannelA);
    return project_pattern(out, [&](const Occupation& occ) {
             return photons_in(occ, keep) == 1;
           }).probability;
  };
  EXPECT_NEAR(transmitted(Pol::V, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(transmitted(Pol::H, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(transmitted(Pol::V, M_PI / 3.0), 0.25, 1e-12);
}

TEST(ElementTest, AllConstructorsAreUnitary) {
  auto reg = optics_registry();
  const double tol = 1e-12;
  EXPECT_LE(unitarity_defect(half_wave_plate(*reg, kChannelA, 0.37)), tol);
  EXPECT_LE(unitarity_defect(quarter_wave_plate(*reg, kChannelA, 1.1)), tol);
  EXPECT_LE(unitarity_defect(beam_splitter(*reg, kChannelA, port_channel(0), 0.42)), tol);
  EXPECT_LE(unitarity_defect(pbs(*reg, kChannelA, port_channel(0))), tol);
  EXPECT_LE(unitarity_defect(polarizer(*reg, kChannelA, loss_channel(0), 0.61)), tol);
}

TEST(OverlapTest, IdenticalPacketsAtZeroDelay) {
  OverlapModel m{100.0, 100.0};
  EXPECT_NEAR(overlap_gamma(m, 0.0), 1.0, 1e-15);
}

TEST(OverlapTest, VanishesAtLargeDelay) {
  OverlapModel m{120.0, 60.0};
  EXPECT_EQ(overlap_gamma(m, 1e6), 0.0);
}

TEST(OverlapTest, HalfWidthMatchesQuadrature) {
  OverlapModel m{50.0, 100.0};  // sigma_input = sigma_dc / 2
  EXPECT_NEAR(overlap_gamma(m, 0.0), std::sqrt(0.8), 1e-12);
  for (double tau : {0.0, 35.0, 90.0, 140.0}) {
    EXPECT_NEAR(overlap_gamma(m, tau), overlap_by_quadrature(50.0, 100.0, tau), 1e-9) << tau;
  }
}

TEST(OverlapTest, EvenAndStrictlyDecreasing) {
  OverlapModel m{120.0, 42.0};
  double prev = overlap_gamma(m, 0.0);
  for (double tau : {10.0, 25.0, 60.0, 130.0, 300.0}) {
    EXPECT_DOUBLE_EQ(overlap_gamma(m, tau), overlap_gamma(m, -tau));
    const double g = overlap_gamma(m, tau);
    EXPECT_LT(g, prev);
    prev = g;
  }
  EXPECT_THROW(overlap_gamma(OverlapModel{0.0, 10.0}, 0.0), ConfigError);
}

}  // namespace
