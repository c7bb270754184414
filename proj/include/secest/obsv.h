#pragma once

#include <vector>

#include "secest/common.h"
#include "secest/model.h"

namespace secest {

/// Per-sensor observability blocks O_i (n x n, row j = C_i A^j) and their
/// vertical stack over a subset, in ascending sensor order.
struct ObservabilityBundle {
  SensorSubset subset;
  std::vector<Matrix> blocks;
  Matrix stacked;
};

/// Window noise structure over a subset: J_s maps the stacked process noise
/// [w(t); ...; w(t+n-1)] into the output windows, M_s = sigma_w2 J_s J_s' +
/// sigma_v2 I.
struct NoiseStructure {
  Matrix J;
  Matrix M;
};

/// Singular values above this fraction of max(1, sigma_max) count toward rank.
inline constexpr double kRankTolerance = 1e-8;

/// Default cap on p for the exhaustive sparse-observability computation.
inline constexpr int kSparseObservabilityMaxSensors = 20;

ObservabilityBundle ObservabilityMatrix(const SystemModel& model, const SensorSubset& s);

/// All p blocks, index i-1 for sensor i.
std::vector<Matrix> SensorBlocks(const SystemModel& model);

/// Rows of O for the subset, stacked, taken from precomputed blocks.
Matrix StackBlocks(const std::vector<Matrix>& blocks, const SensorSubset& s);

int NumericalRank(const Matrix& m);
bool IsObservable(const SystemModel& model, const SensorSubset& s);

/// Largest theta with every (p - theta)-subset observable; -1 when the full
/// set is unobservable.
int SparseObservabilityIndex(const SystemModel& model,
                             int max_sensors = kSparseObservabilityMaxSensors);

/// min over s1 in s with |s1| = |s| - k of lambda_min(O_s1' O_s1), clamped at 0.
double LambdaMinSMinusK(const SystemModel& model, const SensorSubset& s, int k);

/// Builds J_s explicitly and forms M_s from it (n|s| x n^2; reference path).
NoiseStructure ComputeNoiseStructure(const SystemModel& model, const SensorSubset& s);

/// M_s without forming J_s. Within each sensor pair block,
/// (J J')(a+1, b+1) = (J J')(a, b) + (O O')(a, b).
Matrix NoiseCovariance(const SystemModel& model, const SensorSubset& s);
/// Same, from the stacked observability matrix of the subset.
Matrix NoiseCovarianceFromStack(const Matrix& O_s, int n, double sigma_w2, double sigma_v2);

/// J_i for one sensor (n x n^2).
Matrix SensorNoiseBlock(const SystemModel& model, int sensor);

/// Stacked window [y_i(t) .. y_i(t+n-1)] for i in s, ascending. Uses the
/// input-free outputs.
Vector BlockOutputs(const Trajectory& traj, const SensorSubset& s, int t);

/// All block outputs for t in [t_begin, t_begin + count), as columns.
Matrix BlockOutputWindow(const Trajectory& traj, const SensorSubset& s, int t_begin, int count);

}  // namespace secest
