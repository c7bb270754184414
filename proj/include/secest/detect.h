#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "secest/common.h"
#include "secest/kalman.h"
#include "secest/model.h"

namespace secest {

/// Residue-test settings. Without an explicit eta the threshold is derived
/// per subset as lambda_min(s\k) epsilon / (3 n (|s| - k)).
struct DetectorConfig {
  double epsilon = 1.0;
  std::optional<double> eta;
  int k = 0;
  int window = 20000;      // N, rounded up to a multiple of n
  std::optional<int> t1;   // window start; default 10 n (filter warm-up)
  FilterMode mode = FilterMode::kPrediction;
  RiccatiOptions riccati;

  int EffectiveWindow(int n) const;
  int StartTime(int n) const;
  /// Smallest horizon covering the window plus the trailing output blocks.
  int RequiredHorizon(int n) const;
};

struct ResidueReport {
  SensorSubset subset;
  FilterMode mode = FilterMode::kPrediction;
  int t1 = 0;
  int window = 0;
  Matrix sample_matrix;
  Matrix expected_matrix;
  double max_deviation = 0.0;
  double eta = 0.0;
  bool passed = false;
  /// |tr(diagonal block i of the deviation) - eta n| per sensor of the subset.
  std::vector<double> per_sensor_mu;
  /// per_sensor_mu scaled by 1 / lambda_max(O_i' O_i).
  std::vector<double> per_sensor_mu_normalized;

  Matrix Deviation() const { return sample_matrix - expected_matrix; }
};

struct Detection {
  int flag = 0;  // 1 = attack detected
  std::shared_ptr<const FilterRun> estimates;
  ResidueReport report;
};

double EtaAuto(const SystemModel& model, const SensorSubset& s, int k, double epsilon);

/// Threshold for the subset under the config (explicit or derived).
double ResolveEta(const SystemModel& model, const SensorSubset& s, const DetectorConfig& cfg);

/// Attack-free expectation of r_s r_s'.
Matrix ExpectedResidueMatrix(const SystemModel& model, const SensorSubset& s,
                             const SteadyStateFilter& filter);
/// Same from O_s and M_s already at hand.
Matrix ExpectedResidueMatrix(const Matrix& O_s, const Matrix& M_s, const SteadyStateFilter& filter,
                             double sigma_v2);

/// Block residues r_s(t) = ybar_s(t) - O_s x_hat(t) over the estimates' range.
Matrix BlockResidues(const Trajectory& traj, const Matrix& O_s, const FilterRun& estimates);

/// (1/N) sum_t r(t) r(t)' over all columns.
Matrix SampleSecondMoment(const Matrix& residues);

/// Second moments over the n interleaved sub-windows t = t1 + l (mod n).
std::vector<Matrix> StratifiedSecondMoments(const Matrix& residues, int n);

/// Compares sample against expected and fills the per-sensor statistics.
/// Pass iff every entry of (sample - expected) is <= eta.
ResidueReport EvaluateResidueTest(const SystemModel& model, const SensorSubset& s,
                                  Matrix sample, Matrix expected, double eta, FilterMode mode,
                                  int t1, int window);

/// Variant with precomputed sensor blocks O_i and lambda_max(O_i' O_i), both
/// indexed by sensor - 1.
ResidueReport EvaluateResidueTest(const std::vector<Matrix>& blocks,
                                  const std::vector<double>& lambda_max, const SensorSubset& s,
                                  Matrix sample, Matrix expected, double eta, FilterMode mode,
                                  int t1, int window);

std::vector<double> SensorLambdaMax(const std::vector<Matrix>& blocks);

/// Runs the subset's steady-state filter and the block residue test on
/// the window G = {t1, ..., t1 + N - 1}.
Detection AttackDetect(const SystemModel& model, const Trajectory& traj, const SensorSubset& s,
                       const DetectorConfig& cfg);

/// Same, re-using an already solved filter for the subset.
Detection AttackDetect(const SystemModel& model, const Trajectory& traj,
                       const SteadyStateFilter& filter, const DetectorConfig& cfg);

/// tr of the sample average of e e' with e(t) = x(t) - x_hat(t) over G.
double SampleErrorTrace(const Trajectory& traj, const FilterRun& estimates, int t1, int window);

/// True when the windowed error trace exceeds tr(P_ref) + epsilon. Needs the
/// simulated states, so it is a simulation-only oracle.
bool EffectiveAttackOracle(const Trajectory& traj, const FilterRun& estimates,
                           const Matrix& P_ref, double epsilon, int t1, int window);

}  // namespace secest
