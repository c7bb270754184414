#include "secest/kalman.h"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "secest/obsv.h"

namespace secest {
namespace {

Matrix InnovationGainFactor(const Matrix& Cs, double sigma_v2, const Matrix& P) {
  // Returns P C' (C P C' + sigma_v2 I)^-1.
  Matrix S = Cs * P * Cs.transpose();
  S.diagonal().array() += sigma_v2;
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) {
    throw AnalysisError("innovation covariance is not positive definite");
  }
  Matrix PCt = P * Cs.transpose();
  return llt.solve(PCt.transpose()).transpose();
}

}  // namespace

Matrix RiccatiStep(const Matrix& A, const Matrix& Cs, double sigma_w2, double sigma_v2,
                   const Matrix& P) {
  Matrix L = InnovationGainFactor(Cs, sigma_v2, P);
  // A (P - L C P) A' + sigma_w2 I
  Matrix F = P - L * (Cs * P);
  Matrix next = A * F * A.transpose();
  next.diagonal().array() += sigma_w2;
  return 0.5 * (next + next.transpose());
}

double RiccatiResidual(const SystemModel& model, const SensorSubset& s, const Matrix& P) {
  Matrix Cs = model.SubsetC(s);
  return (RiccatiStep(model.A, Cs, model.sigma_w2, model.sigma_v2, P) - P).norm();
}

SteadyStateFilter SolveSteadyState(const SystemModel& model, const SensorSubset& s,
                                   FilterMode mode, const RiccatiOptions& options) {
  model.Validate();
  s.CheckAgainst(model.p());
  if (!(model.sigma_v2 > 0.0)) {
    throw ConfigError("steady-state filtering needs sigma_v2 > 0");
  }
  if (!IsObservable(model, s)) {
    throw ConvergenceError("(A, C_s) is not observable for subset " + s.ToString(),
                           std::numeric_limits<double>::infinity(), 0);
  }
  const int n = model.n();
  Matrix Cs = model.SubsetC(s);

  Matrix P = model.sigma_w2 * Matrix::Identity(n, n);
  long iter = 0;
  double change = std::numeric_limits<double>::infinity();
  while (true) {
    Matrix next = RiccatiStep(model.A, Cs, model.sigma_w2, model.sigma_v2, P);
    ++iter;
    change = (next - P).norm();
    const double scale = std::max(1.0, next.norm());
    P = std::move(next);
    if (!P.allFinite()) {
      throw ConvergenceError("Riccati recursion diverged for subset " + s.ToString() +
                                 " (is (A, C_s) observable?)",
                             change, iter);
    }
    if (change <= options.tol * scale) break;
    if (iter >= options.max_iter) {
      throw ConvergenceError("Riccati recursion did not converge for subset " + s.ToString() +
                                 " after " + std::to_string(iter) +
                                 " iterations; last change " + std::to_string(change),
                             change, iter);
    }
  }

  SteadyStateFilter filter;
  filter.subset = s;
  filter.mode = mode;
  filter.A = model.A;
  filter.C = Cs;
  filter.P_star = P;
  filter.iterations = iter;
  filter.riccati_residual =
      (RiccatiStep(model.A, Cs, model.sigma_w2, model.sigma_v2, P) - P).norm();
  Matrix L = InnovationGainFactor(Cs, model.sigma_v2, P);
  if (mode == FilterMode::kPrediction) {
    filter.gain = model.A * L;
  } else {
    filter.gain = L;
    Matrix F = P - L * (Cs * P);
    filter.F_star = 0.5 * (F + F.transpose());
  }
  return filter;
}

FilterRun RunFilter(const SteadyStateFilter& filter, const Trajectory& traj, int t_start,
                    int t_end) {
  const int n = filter.n();
  if (traj.n() != n) throw DimensionError("trajectory state dimension differs from the filter");
  filter.subset.CheckAgainst(traj.p());
  if (t_start < 0 || t_end < t_start || t_end >= traj.horizon) {
    throw RangeError("filter range [" + std::to_string(t_start) + ", " + std::to_string(t_end) +
                     "] outside horizon " + std::to_string(traj.horizon));
  }
  const int steps = t_end + 1;
  const SensorSubset& s = filter.subset;
  Matrix ys(s.size(), steps);
  for (int r = 0; r < s.size(); ++r) {
    const int i = s[r] - 1;
    ys.row(r) = traj.outputs.row(i).head(steps) - traj.forced_outputs.row(i).head(steps);
  }
  // Innovation injection for every step in one product.
  Matrix injected = filter.gain * ys;

  FilterRun run;
  run.subset = s;
  run.mode = filter.mode;
  run.t_start = t_start;
  run.estimates.resize(n, t_end - t_start + 1);

  if (filter.mode == FilterMode::kPrediction) {
    // x(t+1) = (A - K C) x(t) + K y(t)
    const Matrix closed = filter.A - filter.gain * filter.C;
    Vector x = Vector::Zero(n);
    for (int t = 0; t <= t_end; ++t) {
      if (t >= t_start) run.estimates.col(t - t_start) = x;
      if (t < t_end) x = closed * x + injected.col(t);
    }
  } else {
    // x(t) = (I - L C) A x(t-1) + L y(t), with the prior at t = 0 equal to 0.
    const Matrix correction =
        (Matrix::Identity(n, n) - filter.gain * filter.C) * filter.A;
    Vector x = injected.col(0);
    for (int t = 0; t <= t_end; ++t) {
      if (t > 0) x = correction * x + injected.col(t);
      if (t >= t_start) run.estimates.col(t - t_start) = x;
    }
  }
  return run;
}

Matrix DeltaMatrix(const SystemModel& model, const SensorSubset& s,
                   const SteadyStateFilter& filter) {
  if (filter.mode != FilterMode::kFiltering) {
    throw ConfigError("Delta is defined for filtering-mode filters only");
  }
  if (!(filter.subset == s)) throw ConfigError("filter subset differs from the requested subset");
  const int n = model.n();
  const int m = s.size();
  Matrix O = ObservabilityMatrix(model, s).stacked;
  // E1 picks row 0 of each sensor's window.
  Matrix E1 = Matrix::Zero(n * m, m);
  for (int r = 0; r < m; ++r) E1(r * n, r) = 1.0;
  return model.sigma_v2 * E1 * filter.gain.transpose() * O.transpose();
}

std::pair<SensorSubset, double> WorstSubset(const SystemModel& model, int k,
                                            const RiccatiOptions& options) {
  model.Validate();
  const int p = model.p();
  if (k < 0 || k >= p) throw ConfigError("worst subset needs 0 <= k < p");
  SensorSubset worst;
  double worst_trace = -1.0;
  ForEachSubset(p, p - k, [&](const SensorSubset& s) {
    if (!IsObservable(model, s)) {
      throw AnalysisError("subset " + s.ToString() + " is not observable");
    }
    auto filter = SolveSteadyState(model, s, FilterMode::kPrediction, options);
    const double trace = filter.P_star.trace();
    // Near-equal traces count as ties so symmetric sensors keep lexicographic order.
    if (trace > worst_trace * (1.0 + 1e-12) + 1e-15) {
      worst_trace = trace;
      worst = s;
    }
    return true;
  });
  return {worst, worst_trace};
}

}  // namespace secest
