#pragma once

#include <utility>

#include "secest/common.h"
#include "secest/model.h"

namespace secest {

struct RiccatiOptions {
  /// Stop when ||P_next - P||_F <= tol * max(1, ||P||_F).
  double tol = 1e-12;
  long max_iter = 1'000'000;
};

/// Steady-state Kalman filter over one sensor subset.
///
/// P_star is the steady prediction error covariance. In filtering mode the
/// gain is L_s = P C_s' (C_s P C_s' + sigma_v2 I)^-1 and F_star = P - L_s C_s P;
/// in prediction mode the gain is K_s = A L_s.
struct SteadyStateFilter {
  SensorSubset subset;
  FilterMode mode = FilterMode::kPrediction;
  Matrix A;
  Matrix C;  // C_s
  Matrix gain;
  Matrix P_star;
  Matrix F_star;  // empty in prediction mode
  long iterations = 0;
  double riccati_residual = 0.0;

  int n() const { return static_cast<int>(A.rows()); }
  /// P_star (prediction) or F_star (filtering).
  const Matrix& ErrorCovariance() const {
    return mode == FilterMode::kPrediction ? P_star : F_star;
  }
};

/// Estimates x_hat(t) for t in [t_start, t_end], columns in time order.
struct FilterRun {
  SensorSubset subset;
  FilterMode mode = FilterMode::kPrediction;
  int t_start = 0;
  Matrix estimates;

  int length() const { return static_cast<int>(estimates.cols()); }
  auto At(int t) const { return estimates.col(t - t_start); }
};

/// One step of the covariance recursion.
Matrix RiccatiStep(const Matrix& A, const Matrix& Cs, double sigma_w2, double sigma_v2,
                   const Matrix& P);

/// ||Ric(P) - P||_F.
double RiccatiResidual(const SystemModel& model, const SensorSubset& s, const Matrix& P);

SteadyStateFilter SolveSteadyState(const SystemModel& model, const SensorSubset& s,
                                   FilterMode mode, const RiccatiOptions& options = {});

/// Runs the filter from x_hat(0) = 0 over the input-free outputs and keeps
/// the estimates on [t_start, t_end].
FilterRun RunFilter(const SteadyStateFilter& filter, const Trajectory& traj, int t_start,
                    int t_end);

/// sigma_v2 E1 L_s' O_s': cross term between the output-window noise and the
/// filtering correction at time t.
Matrix DeltaMatrix(const SystemModel& model, const SensorSubset& s,
                   const SteadyStateFilter& filter);

/// The (p-k)-subset maximizing tr(P*_s), first in lexicographic order on ties.
std::pair<SensorSubset, double> WorstSubset(const SystemModel& model, int k,
                                            const RiccatiOptions& options = {});

}  // namespace secest
