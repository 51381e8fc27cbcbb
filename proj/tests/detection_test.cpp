#include "stimclone/detection.hpp"

#include <gtest/gtest.h>

#include "stimclone/pdc.hpp"
#include "test_util.hpp"

using namespace stimclone;
using namespace stimclone::fock;
using namespace stimclone::detection;

namespace {

FockState basis_state(const RegistryPtr& reg,
                      std::initializer_list<std::pair<SpatialLabel, Pol>> photons) {
  FockState s = make_vacuum(reg);
  for (auto [ch, pol] : photons) s = create(s, reg->id(ch, pol));
  return normalize(s);
}

TEST(DetectorModelTest, ClickProbability) {
  DetectorModel det{0.25, 0.0};
  EXPECT_DOUBLE_EQ(det.click_probability(0), 0.0);
  EXPECT_DOUBLE_EQ(det.click_probability(1), 0.25);
  EXPECT_NEAR(det.click_probability(2), 1.0 - 0.75 * 0.75, 1e-15);
  DetectorModel dark{0.0, 0.3};
  EXPECT_NEAR(dark.click_probability(0), 0.3, 1e-15);
  DetectorModel bad{1.5, 0.0};
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(OutcomeTest, PbsCoincidenceDetectsOppositePair) {
  auto reg = make_cloning_registry();
  const FockState s = basis_state(reg, {{kChannelA, Pol::V}, {kChannelA, Pol::H}, {kChannelB, Pol::V}});
  const auto table = outcome_probabilities(s, {Basis::LinearVH, Scheme::PbsCoincidence}, {1.0, 0.0});
  EXPECT_NEAR(table.p[kTripleCoincidence], 1.0, 1e-12);
}

TEST(OutcomeTest, IdenticalPairSplitsHalfTheTime) {
  auto reg = make_cloning_registry();
  const FockState s = basis_state(reg, {{kChannelA, Pol::V}, {kChannelA, Pol::V}, {kChannelB, Pol::H}});
  const auto table = outcome_probabilities(s, {Basis::LinearVH, Scheme::PolarizerPlusBs}, {1.0, 0.0});
  EXPECT_NEAR(table.p[kTripleCoincidence], 0.5, 1e-12);
}

TEST(OutcomeTest, ZeroEfficiencyNeverClicks) {
  auto reg = make_cloning_registry();
  const FockState s = basis_state(reg, {{kChannelA, Pol::V}, {kChannelB, Pol::H}});
  const auto table = outcome_probabilities(s, {Basis::LinearVH, Scheme::PbsCoincidence}, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(table.p[0], 1.0);
}

TEST(OutcomeTest, RequiresNormalizedState) {
  auto reg = make_cloning_registry();
  const FockState s = 2.0 * make_vacuum(reg);
  EXPECT_THROW(outcome_probabilities(s, {Basis::LinearVH, Scheme::PbsCoincidence}, {1.0, 0.0}),
               UsageError);
}

TEST(OutcomeTest, TableSumsToOne) {
  auto reg = make_cloning_registry();
  std::mt19937_64 rng(31);
  for (double eta : {0.0, 0.1, 0.5, 1.0}) {
    pdc::InputSpec spec;
    spec.gamma = 0.6;
    const FockState evolved = normalize(pdc::evolve(pdc::inject_input(spec, reg), pdc::PdcConfig{}));
    for (auto scheme : {Scheme::PbsCoincidence, Scheme::PolarizerPlusBs}) {
      for (auto basis : {Basis::LinearVH, Basis::Linear45, Basis::Circular}) {
        const auto table = outcome_probabilities(evolved, {basis, scheme}, {eta, 0.0});
        EXPECT_NEAR(table.total(), 1.0, 1e-12);
        for (double p : table.p) EXPECT_GE(p, -1e-15);
      }
    }
  }
}

// The same-polarization pair is only seen probabilistically behind the beam
// splitter, so the N(2,0) base level is half the N(1,1) one.
TEST(OutcomeTest, BaseLevelHalving) {
  auto reg = make_cloning_registry();
  pdc::InputSpec spec;
  spec.gamma = 0.0;  // far-delay regime
  const FockState evolved = normalize(pdc::evolve(pdc::inject_input(spec, reg), pdc::PdcConfig{}));
  const DetectorModel det{1.0, 0.0};
  const auto n20 = outcome_probabilities(evolved, {Basis::LinearVH, Scheme::PolarizerPlusBs}, det);
  const auto n11 = outcome_probabilities(evolved, {Basis::LinearVH, Scheme::PbsCoincidence}, det);
  EXPECT_NEAR(n20.p[kTripleCoincidence] / n11.p[kTripleCoincidence], 0.5, 1e-12);
}

TEST(ClassifyTest, PatternsMapToEventClasses) {
  EXPECT_EQ(classify(kTriggerBit, Scheme::PolarizerPlusBs), EventClass::TriggerOnly);
  EXPECT_EQ(classify(kTripleCoincidence, Scheme::PolarizerPlusBs), EventClass::N20);
  EXPECT_EQ(classify(kTripleCoincidence, Scheme::PbsCoincidence), EventClass::N11);
  EXPECT_EQ(classify(kD2Bit | kD3Bit, Scheme::PolarizerPlusBs), EventClass::Other);
  EXPECT_EQ(classify(kTriggerBit | kD2Bit, Scheme::PbsCoincidence), EventClass::Other);
}

TEST(SampleTest, AllMassOnNoClick) {
  OutcomeTable table;
  table.p[0] = 1.0;
  const auto counts = sample_events(table, 1000, 42);
  EXPECT_EQ(counts[0], 1000);
  for (int i = 1; i < kNumPatterns; ++i) EXPECT_EQ(counts[i], 0);
}

TEST(SampleTest, BinomialStatistics) {
  OutcomeTable table;
  table.p[1] = 0.5;
  table.p[2] = 0.5;
  const std::int64_t pulses = 1000000;
  const auto counts = sample_events(table, pulses, 7);
  const double sigma = std::sqrt(pulses * 0.25);
  EXPECT_EQ(counts[1] + counts[2], pulses);
  EXPECT_NEAR(static_cast<double>(counts[1]), 500000.0, 5.0 * sigma);
}

TEST(SampleTest, DeterministicForFixedSeed) {
  OutcomeTable table;
  table.p[0] = 0.999;
  table.p[1] = 0.0007;
  table.p[5] = 0.0003;
  const auto a = sample_events(table, 500000, 12345);
  const auto b = sample_events(table, 500000, 12345);
  EXPECT_EQ(a, b);
  const auto c = sample_events(table, 500000, 12346);
  EXPECT_NE(a, c);
}

TEST(SampleTest, FrequenciesMatchExactTableWithinFourSigma) {
  auto reg = make_cloning_registry();
  pdc::InputSpec spec;
  spec.gamma = 0.8;
  const FockState evolved = normalize(pdc::evolve(pdc::inject_input(spec, reg), pdc::PdcConfig{}));
  const auto table =
      outcome_probabilities(evolved, {Basis::LinearVH, Scheme::PbsCoincidence}, {0.4, 0.0});
  const std::int64_t pulses = 100000;
  const auto counts = sample_events(table, pulses, 99);
  for (int pattern = 0; pattern < kNumPatterns; ++pattern) {
    const double mean = table.p[pattern] * pulses;
    const double sigma = std::sqrt(std::max(1.0, mean * (1.0 - table.p[pattern])));
    EXPECT_NEAR(static_cast<double>(counts[pattern]), mean, 4.0 * sigma) << pattern;
  }
}

TEST(SeedTest, DerivedStreamsDiffer) {
  const auto s1 = derive_seed(1, {0, 0, 0});
  const auto s2 = derive_seed(1, {0, 0, 1});
  const auto s3 = derive_seed(1, {0, 1, 0});
  const auto s4 = derive_seed(2, {0, 0, 0});
  EXPECT_NE(s1, s2);
  EXPECT_NE(s1, s3);
  EXPECT_NE(s1, s4);
  EXPECT_EQ(s1, derive_seed(1, {0, 0, 0}));
}

}  // namespace
