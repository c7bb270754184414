#include <gtest/gtest.h>

#include "oracles.h"
#include "secest/noiseless.h"
#include "secest/obsv.h"

namespace secest {
namespace {

SystemModel Example1() {
  SystemModel m;
  m.A = Matrix::Ones(1, 1);
  m.C = Matrix::Ones(3, 1);
  m.sigma_w2 = m.sigma_v2 = 0.0;
  return m;
}

SystemModel Example2() {
  SystemModel m;
  m.A = Matrix::Identity(2, 2);
  m.C = (Matrix(5, 2) << 1, 0, 0, 1, 1, 1, 1, -1, 1, 2).finished();
  m.sigma_w2 = m.sigma_v2 = 0.0;
  return m;
}

Vector RandomVector(GaussianSource& rng, int n) { return rng.NextVector(n, 1.0); }

void Corrupt(const SystemModel& m, SymbolObservation& obs, int sensor, const Vector& x) {
  obs.symbols[static_cast<size_t>(sensor - 1)] = SensorBlocks(m)[static_cast<size_t>(sensor - 1)] * x;
}

TEST(Encode, Examples) {
  const auto m = testing::RandomModel(3, 4, 1);
  for (const auto& y : Encode(m, Vector::Zero(3)).symbols) EXPECT_EQ(y, Vector::Zero(3));
  const auto obs = Encode(Example1(), Vector::Constant(1, 2.0));
  ASSERT_EQ(obs.p(), 3);
  for (const auto& y : obs.symbols) EXPECT_EQ(y, Vector::Constant(1, 2.0));
  EXPECT_THROW(Encode(m, Vector::Zero(2)), DimensionError);
}

TEST(Encode, SymbolsAreBlockTimesState) {
  const auto m = testing::RandomModel(4, 3, 2);
  const Vector x0 = Vector::LinSpaced(4, -1.0, 2.0);
  const auto obs = Encode(m, x0);
  const auto blocks = SensorBlocks(m);
  for (int d = 0; d < 3; ++d) EXPECT_LT((obs.symbols[d] - blocks[d] * x0).norm(), 1e-14);
}

TEST(Decode, RoundTrip) {
  GaussianSource rng(314, 0);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(trial % 4);
    const auto m = testing::RandomModel(n, 2 + static_cast<int>(trial % 3), trial, 0.9, 0.0, 0.0);
    const Vector x0 = RandomVector(rng, n);
    const auto result = Decode(m, Encode(m, x0), 0);
    EXPECT_LT((result.state - x0).norm(), 1e-10 * (1 + x0.norm())) << "trial " << trial;
    EXPECT_TRUE(result.corrupted.empty());
    EXPECT_TRUE(result.unique);
  }
}

TEST(Decode, CorrectsEveryPatternWithinHalfTheta) {
  GaussianSource rng(2, 0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int p = 5 + static_cast<int>(seed % 3);
    const auto m = testing::RandomModel(2, p, seed, 0.9, 0.0, 0.0);
    const int theta = SparseObservabilityIndex(m);
    const int k = theta / 2;
    ASSERT_GE(k, 1);
    const Vector x0 = RandomVector(rng, 2);
    ForEachSubset(p, k, [&](const SensorSubset& bad) {
      auto obs = Encode(m, x0);
      for (int d : bad) Corrupt(m, obs, d, RandomVector(rng, 2));
      const auto result = Decode(m, obs, k);
      EXPECT_TRUE(result.unique);
      EXPECT_LT((result.state - x0).norm(), 1e-9 * (1 + x0.norm()));
      for (int d : bad) {
        EXPECT_NE(std::find(result.corrupted.begin(), result.corrupted.end(), d),
                  result.corrupted.end());
      }
      return true;
    });
  }
}

TEST(Decode, KZeroClean) {
  const auto m = Example2();
  const Vector x0 = (Vector(2) << 1, 2).finished();
  const auto result = Decode(m, Encode(m, x0), 0);
  EXPECT_LT((result.state - x0).norm(), 1e-12);
  EXPECT_TRUE(result.corrupted.empty());
}

TEST(Decode, Example2IsAmbiguous) {
  const auto m = Example2();
  EXPECT_EQ(SparseObservabilityIndex(m), 3);
  auto obs = Encode(m, (Vector(2) << 1, 2).finished());
  Corrupt(m, obs, 4, (Vector(2) << 1, 3).finished());
  Corrupt(m, obs, 5, (Vector(2) << 1, 3).finished());
  const auto result = Decode(m, obs, 2);
  EXPECT_FALSE(result.unique);
  ASSERT_EQ(result.explanations.size(), 2U);
  EXPECT_LT((result.explanations[0].state - Vector::LinSpaced(2, 1, 2)).norm(), 1e-12);
  EXPECT_EQ(result.explanations[0].corrupted, (std::vector<int>{4, 5}));
  EXPECT_LT((result.explanations[1].state - Vector::LinSpaced(2, 1, 3)).norm(), 1e-12);
  EXPECT_EQ(result.explanations[1].consistent_subset, SensorSubset({1, 4, 5}));
  // The first consistent subset gives the reported state.
  EXPECT_EQ(result.state, result.explanations[0].state);

  DecodeOptions first_hit;
  first_hit.complete_enumeration = false;
  EXPECT_EQ(Decode(m, obs, 2, first_hit).explanations.size(), 1U);
}

TEST(Decode, AmbiguityBeyondHalfTheta) {
  // k >= (theta + 1) / 2: corrupt k symbols toward a second state that agrees
  // with the first on p - 2k sensors.
  const auto m = Example1();
  auto obs = Encode(m, Vector::Constant(1, 1.0));
  Corrupt(m, obs, 3, Vector::Constant(1, 4.0));
  const auto result = Decode(m, obs, 1);
  EXPECT_TRUE(result.unique);
  EXPECT_NEAR(result.state(0), 1.0, 1e-12);

  SystemModel four = Example1();
  four.C = Matrix::Ones(4, 1);
  auto tied = Encode(four, Vector::Constant(1, 1.0));
  Corrupt(four, tied, 3, Vector::Constant(1, 4.0));
  Corrupt(four, tied, 4, Vector::Constant(1, 4.0));
  const auto ambiguous = Decode(four, tied, 2);
  EXPECT_FALSE(ambiguous.unique);
}

TEST(Decode, NoConsistentSubset) {
  const auto m = Example2();
  auto obs = Encode(m, Vector::Zero(2));
  GaussianSource rng(7, 0);
  for (int d = 1; d <= 5; ++d) Corrupt(m, obs, d, RandomVector(rng, 2));
  EXPECT_THROW(Decode(m, obs, 1), DecodeError);
  EXPECT_THROW(Decode(m, obs, 5), ConfigError);
}

TEST(DetectCorruption, CleanIsConsistent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = testing::RandomModel(3, 4, seed, 0.9, 0.0, 0.0);
    EXPECT_FALSE(DetectCorruption(m, Encode(m, Vector::LinSpaced(3, 1, 3))));
  }
}

TEST(DetectCorruption, UpToThetaOffCodewordCorruptions) {
  GaussianSource rng(11, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = testing::RandomModel(2, 5, seed, 0.9, 0.0, 0.0);
    const int theta = SparseObservabilityIndex(m);
    const Vector x0 = RandomVector(rng, 2);
    for (int k = 1; k <= theta; ++k) {
      ForEachSubset(5, k, [&](const SensorSubset& bad) {
        auto obs = Encode(m, x0);
        const Vector other = x0 + RandomVector(rng, 2);
        for (int d : bad) Corrupt(m, obs, d, other);
        EXPECT_TRUE(DetectCorruption(m, obs)) << bad.ToString();
        return true;
      });
    }
  }
}

TEST(DetectCorruption, FullCodewordSwapIsUndetectable) {
  const auto m = Example1();
  auto obs = Encode(m, Vector::Constant(1, 1.0));
  for (int d = 1; d <= 3; ++d) Corrupt(m, obs, d, Vector::Constant(1, 5.0));
  EXPECT_FALSE(DetectCorruption(m, obs));
}

TEST(DetectCorruption, UnobservableFullSet) {
  SystemModel m = Example2();
  m.C = Matrix::Zero(3, 2);
  EXPECT_THROW(DetectCorruption(m, Encode(m, Vector::Zero(2))), AnalysisError);
  EXPECT_THROW(MinSymbolDistance(m), AnalysisError);
}

TEST(MinSymbolDistance, Examples) {
  EXPECT_EQ(MinSymbolDistance(Example1()), 3);
  SystemModel single = Example1();
  single.C = Matrix::Ones(1, 1);
  EXPECT_EQ(MinSymbolDistance(single), 1);
  EXPECT_EQ(MinSymbolDistance(Example2()), 4);
}

TEST(MinSymbolDistance, SampledPairsNeverCloser) {
  GaussianSource rng(55, 0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SystemModel m = testing::RandomModel(2, 4, seed, 0.9, 0.0, 0.0);
    // A repeated row lowers theta so that the bound is not simply p.
    m.C.row(3) = m.C.row(2);
    const int distance = MinSymbolDistance(m);
    int observed = m.p();
    for (int pair = 0; pair < 500; ++pair) {
      const auto a = Encode(m, RandomVector(rng, 2));
      const auto b = Encode(m, RandomVector(rng, 2));
      observed = std::min(observed, SymbolDistance(a, b));
    }
    EXPECT_GE(observed, distance) << "seed " << seed;
  }
}

}  // namespace
}  // namespace secest
