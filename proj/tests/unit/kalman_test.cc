#include <cmath>

#include <gtest/gtest.h>

#include "oracles.h"
#include "secest/detect.h"
#include "secest/kalman.h"
#include "secest/obsv.h"

namespace secest {
namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

SystemModel Scalar(double a, int sensors, double sigma_w2 = 1.0, double sigma_v2 = 1.0) {
  SystemModel m;
  m.A = Matrix::Constant(1, 1, a);
  m.C = Matrix::Ones(sensors, 1);
  m.sigma_w2 = sigma_w2;
  m.sigma_v2 = sigma_v2;
  return m;
}

TEST(SteadyState, ScalarExampleOneSensor) {
  const auto f = SolveSteadyState(Scalar(1.0, 3), {1}, FilterMode::kPrediction);
  EXPECT_NEAR(f.P_star(0, 0), kGolden, 1e-10);
  EXPECT_NEAR(f.gain(0, 0), kGolden / (kGolden + 1.0), 1e-10);
}

TEST(SteadyState, ScalarFiltering) {
  const auto f = SolveSteadyState(Scalar(1.0, 3), {2}, FilterMode::kFiltering);
  EXPECT_NEAR(f.F_star(0, 0), kGolden / (kGolden + 1.0), 1e-10);
  EXPECT_NEAR(f.F_star(0, 0), 0.6180339887, 1e-9);
}

TEST(SteadyState, ScalarClosedFormOracle) {
  for (double a : {0.0, 0.5, 0.9, 1.0, 1.3}) {
    for (int m = 1; m <= 4; ++m) {
      for (double sw : {0.3, 1.0, 2.5}) {
        const auto model = Scalar(a, m, sw, 0.7);
        const auto f = SolveSteadyState(model, SensorSubset::Full(m), FilterMode::kPrediction);
        const double expected = testing::ScalarDareRoot(a, m, sw, 0.7);
        EXPECT_NEAR(f.P_star(0, 0), expected, 1e-10 * (1 + expected))
            << "a=" << a << " m=" << m << " sw=" << sw;
      }
    }
  }
}

TEST(SteadyState, RiccatiResidualOnRandomModels) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = testing::RandomModel(2 + static_cast<int>(seed % 10), 4, seed, 0.95);
    const SensorSubset s = SensorSubset::Full(4).Without(1 + static_cast<int>(seed % 4));
    if (!IsObservable(m, s)) continue;
    const auto f = SolveSteadyState(m, s, FilterMode::kFiltering);
    EXPECT_LE(RiccatiResidual(m, s, f.P_star), 1e-9);
    EXPECT_LE(f.riccati_residual, 1e-9);
    EXPECT_TRUE(f.P_star.isApprox(f.P_star.transpose()));
    const Matrix Cs = m.SubsetC(s);
    Matrix S = Cs * f.P_star * Cs.transpose();
    S.diagonal().array() += m.sigma_v2;
    const Matrix L = f.P_star * Cs.transpose() * S.inverse();
    EXPECT_LT((f.gain - L).norm(), 1e-9 * (1 + L.norm()));
    EXPECT_LT((f.F_star - (f.P_star - L * Cs * f.P_star)).norm(), 1e-9 * (1 + f.P_star.norm()));
    EXPECT_LE(f.F_star.trace(), f.P_star.trace() + 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(f.F_star);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
  }
}

TEST(SteadyState, PredictionGainIsAL) {
  const auto m = testing::RandomModel(4, 3, 9);
  const auto pred = SolveSteadyState(m, {1, 2}, FilterMode::kPrediction);
  const auto filt = SolveSteadyState(m, {1, 2}, FilterMode::kFiltering);
  EXPECT_LT((pred.gain - m.A * filt.gain).norm(), 1e-10);
  EXPECT_TRUE(pred.P_star.isApprox(filt.P_star));
  EXPECT_EQ(pred.F_star.size(), 0);
}

TEST(SteadyState, NoProcessNoiseGivesZero) {
  const auto m = testing::RandomModel(3, 2, 4, 0.7, 0.0, 1.0);
  const auto f = SolveSteadyState(m, {1}, FilterMode::kPrediction);
  EXPECT_LT(f.P_star.norm(), 1e-9);
}

TEST(SteadyState, UnobservablePairFails) {
  SystemModel m;
  m.A = Matrix::Identity(2, 2);
  m.C = (Matrix(1, 2) << 1, 0).finished();
  EXPECT_THROW(SolveSteadyState(m, {1}, FilterMode::kPrediction), ConvergenceError);
}

TEST(SteadyState, IterationCapReported) {
  RiccatiOptions options;
  options.max_iter = 2;
  try {
    SolveSteadyState(Scalar(0.99, 1), {1}, FilterMode::kPrediction, options);
    FAIL() << "expected a convergence error";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.iterations(), 2);
    EXPECT_GT(e.last_change(), 0.0);
  }
}

TEST(SteadyState, NeedsSensorNoise) {
  EXPECT_THROW(SolveSteadyState(Scalar(0.5, 1, 1.0, 0.0), {1}, FilterMode::kPrediction),
               ConfigError);
}

TEST(SteadyState, MoreSensorsNeverIncreaseTrace) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = testing::RandomModel(4, 5, seed);
    std::vector<int> idx;
    double last = INFINITY;
    for (int i = 1; i <= 5; ++i) {
      idx.push_back(i);
      const SensorSubset s(idx);
      if (!IsObservable(m, s)) continue;
      const double trace = SolveSteadyState(m, s, FilterMode::kPrediction).P_star.trace();
      EXPECT_LE(trace, last + 1e-9);
      last = trace;
    }
  }
}

TEST(RunFilter, ZeroNoiseStaysAtZero) {
  const auto m = testing::RandomModel(3, 2, 5, 0.8, 1.0, 1.0);
  auto quiet = m;
  quiet.sigma_w2 = quiet.sigma_v2 = 0.0;
  const auto traj = Simulate(quiet, AttackSpec::None(), 50, Vector::Zero(3), 1);
  for (auto mode : {FilterMode::kPrediction, FilterMode::kFiltering}) {
    const auto run = RunFilter(SolveSteadyState(m, {1, 2}, mode), traj, 0, 49);
    EXPECT_EQ(run.estimates, Matrix::Zero(3, 50));
  }
}

TEST(RunFilter, Causality) {
  const auto m = testing::RandomModel(3, 2, 6);
  auto traj = Simulate(m, AttackSpec::None(), 40, Vector::Zero(3), 2);
  const auto pred = SolveSteadyState(m, {1, 2}, FilterMode::kPrediction);
  const auto filt = SolveSteadyState(m, {1, 2}, FilterMode::kFiltering);
  const auto p0 = RunFilter(pred, traj, 0, 39);
  const auto f0 = RunFilter(filt, traj, 0, 39);
  traj.outputs(0, 20) += 5.0;
  const auto p1 = RunFilter(pred, traj, 0, 39);
  const auto f1 = RunFilter(filt, traj, 0, 39);
  // Prediction at t uses y up to t - 1; filtering uses y(t) too.
  EXPECT_EQ(p0.estimates.leftCols(21), p1.estimates.leftCols(21));
  EXPECT_NE(p0.estimates.col(21), p1.estimates.col(21));
  EXPECT_EQ(f0.estimates.leftCols(20), f1.estimates.leftCols(20));
  EXPECT_NE(f0.estimates.col(20), f1.estimates.col(20));
}

TEST(RunFilter, MatchesTwoStepUpdate) {
  const auto m = testing::RandomModel(3, 2, 7);
  const auto traj = Simulate(m, AttackSpec::None(), 30, Vector::Zero(3), 3);
  const auto filt = SolveSteadyState(m, {2}, FilterMode::kFiltering);
  const auto pred = SolveSteadyState(m, {2}, FilterMode::kPrediction);
  const auto fr = RunFilter(filt, traj, 0, 29);
  const auto pr = RunFilter(pred, traj, 0, 29);
  Vector prior = Vector::Zero(3);
  for (int t = 0; t < 30; ++t) {
    EXPECT_LT((pr.At(t) - prior).norm(), 1e-10);
    const Vector post = prior + filt.gain * (traj.outputs.row(1).col(t) - filt.C * prior);
    EXPECT_LT((fr.At(t) - post).norm(), 1e-10);
    prior = m.A * post;
  }
}

TEST(RunFilter, RangeAndDimensionErrors) {
  const auto m = testing::RandomModel(3, 2, 8);
  const auto traj = Simulate(m, AttackSpec::None(), 10, Vector::Zero(3), 1);
  const auto f = SolveSteadyState(m, {1}, FilterMode::kPrediction);
  EXPECT_THROW(RunFilter(f, traj, 0, 10), RangeError);
  const auto other = testing::RandomModel(2, 2, 8);
  const auto short_traj = Simulate(other, AttackSpec::None(), 10, Vector::Zero(2), 1);
  EXPECT_THROW(RunFilter(f, short_traj, 0, 5), DimensionError);
}

TEST(RunFilter, AttackFreeErrorMatchesSteadyCovariance) {
  const auto m = Scalar(1.0, 3);
  const int N = 100000;
  const auto traj = Simulate(m, AttackSpec::None(), N + 100, Vector::Zero(1), 31);
  const auto f = SolveSteadyState(m, {1, 2, 3}, FilterMode::kPrediction);
  const auto run = RunFilter(f, traj, 0, N + 99);
  const double trace = SampleErrorTrace(traj, run, 100, N);
  EXPECT_NEAR(trace, f.P_star(0, 0), 0.05 * f.P_star(0, 0));
  const auto single = SolveSteadyState(m, {1}, FilterMode::kPrediction);
  const double single_trace = SampleErrorTrace(traj, RunFilter(single, traj, 0, N + 99), 100, N);
  EXPECT_NEAR(single_trace, kGolden, 0.05 * kGolden);
}

TEST(RunFilter, ZeroOutputAttackDrivesEstimateToZero) {
  const auto m = Scalar(1.0, 1);
  const int T = 5000;
  const auto traj = Simulate(m, AttackSpec::ZeroOutput({1}), T, Vector::Zero(1), 17);
  const auto f = SolveSteadyState(m, {1}, FilterMode::kPrediction);
  const auto run = RunFilter(f, traj, 0, T - 1);
  EXPECT_LT(run.estimates.rightCols(100).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(SampleErrorTrace(traj, run, 1000, 4000), 20.0 * f.P_star(0, 0));
}

TEST(Delta, ScalarWindowIsIdentitySelector) {
  const auto m = Scalar(0.8, 3, 1.0, 0.6);
  const SensorSubset s{1, 3};
  const auto f = SolveSteadyState(m, s, FilterMode::kFiltering);
  const Matrix O = ObservabilityMatrix(m, s).stacked;
  EXPECT_LT((DeltaMatrix(m, s, f) - 0.6 * f.gain.transpose() * O.transpose()).norm(), 1e-14);
}

TEST(Delta, VanishesWithoutSensorNoise) {
  const auto m = testing::RandomModel(3, 2, 3);
  const auto f = SolveSteadyState(m, {1, 2}, FilterMode::kFiltering);
  auto quiet = m;
  quiet.sigma_v2 = 0.0;
  EXPECT_EQ(DeltaMatrix(quiet, {1, 2}, f), Matrix::Zero(6, 6));
}

TEST(Delta, OnlyFirstWindowRowsAreNonzero) {
  const auto m = testing::RandomModel(3, 2, 3);
  const auto f = SolveSteadyState(m, {1, 2}, FilterMode::kFiltering);
  const Matrix D = DeltaMatrix(m, {1, 2}, f);
  for (int r = 0; r < 6; ++r) {
    if (r % 3 != 0) EXPECT_EQ(D.row(r).norm(), 0.0);
  }
}

TEST(Delta, PredictionModeRejected) {
  const auto m = testing::RandomModel(3, 2, 3);
  const auto f = SolveSteadyState(m, {1}, FilterMode::kPrediction);
  EXPECT_THROW(DeltaMatrix(m, {1}, f), ConfigError);
}

TEST(Delta, MonteCarloOracle) {
  const auto m = testing::RandomModel(3, 2, 123, 0.8, 1.0, 0.8);
  const SensorSubset s{1, 2};
  const auto f = SolveSteadyState(m, s, FilterMode::kFiltering);
  const Matrix D = DeltaMatrix(m, s, f);
  const auto mc = testing::DeltaMonteCarlo(m, s, f, 1000000, 99);
  for (int i = 0; i < D.rows(); ++i) {
    for (int j = 0; j < D.cols(); ++j) {
      EXPECT_LE(std::abs(mc.mean(i, j) - D(i, j)), 3.0 * mc.standard_error(i, j) + 1e-12)
          << "entry (" << i << ", " << j << ")";
    }
  }
}

TEST(WorstSubset, SymmetricSensorsTieLexicographically) {
  const auto m = Scalar(1.0, 3);
  const auto [s, trace] = WorstSubset(m, 1);
  EXPECT_EQ(s, SensorSubset({1, 2}));
  EXPECT_NEAR(trace, SolveSteadyState(m, {1, 2}, FilterMode::kPrediction).P_star.trace(), 1e-12);
}

TEST(WorstSubset, DropsTheMostInformativeSensor) {
  SystemModel m = testing::RandomModel(2, 3, 5);
  m.C.row(0) *= 10.0;
  double best = -1.0;
  SensorSubset argmax;
  for (const auto& s : AllSubsets(3, 2)) {
    const double t = SolveSteadyState(m, s, FilterMode::kPrediction).P_star.trace();
    if (t > best) {
      best = t;
      argmax = s;
    }
  }
  const auto [s, trace] = WorstSubset(m, 1);
  EXPECT_EQ(s, argmax);
  EXPECT_FALSE(s.contains(1));
  EXPECT_NEAR(trace, best, 1e-12);
}

TEST(WorstSubset, KZeroIsFullSet) {
  const auto m = testing::RandomModel(3, 3, 2);
  const auto [s, trace] = WorstSubset(m, 0);
  EXPECT_EQ(s, SensorSubset::Full(3));
  EXPECT_NEAR(trace, SolveSteadyState(m, s, FilterMode::kPrediction).P_star.trace(), 1e-12);
}

TEST(WorstSubset, UnobservableSubsetNamed) {
  SystemModel m;
  m.A = Matrix::Identity(2, 2);
  m.C = (Matrix(3, 2) << 1, 0, 0, 1, 1, 1).finished();
  EXPECT_NO_THROW(WorstSubset(m, 1));
  m.C = (Matrix(3, 2) << 1, 0, 0, 1, 1, 0).finished();
  try {
    WorstSubset(m, 1);
    FAIL() << "expected an analysis error";
  } catch (const AnalysisError& e) {
    EXPECT_NE(std::string(e.what()).find("{1,3}"), std::string::npos);
  }
}

}  // namespace
}  // namespace secest
