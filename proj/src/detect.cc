#include "secest/detect.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "secest/obsv.h"

namespace secest {

int DetectorConfig::EffectiveWindow(int n) const {
  if (window < 1) throw ConfigError("window length N must be positive");
  return ((window + n - 1) / n) * n;
}

int DetectorConfig::StartTime(int n) const {
  const int start = t1.value_or(DefaultBurnIn(n));
  if (start < 0) throw ConfigError("window start t1 must be nonnegative");
  return start;
}

int DetectorConfig::RequiredHorizon(int n) const {
  return StartTime(n) + EffectiveWindow(n) + n - 1;
}

double EtaAuto(const SystemModel& model, const SensorSubset& s, int k, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  const double lambda = LambdaMinSMinusK(model, s, k);
  if (!(lambda > 0.0)) {
    throw AnalysisError("lambda_min for " + s.ToString() + " with k = " + std::to_string(k) +
                        " is zero: some (|s|-k)-subset is unobservable");
  }
  return lambda / (3.0 * model.n() * (s.size() - k)) * epsilon;
}

double ResolveEta(const SystemModel& model, const SensorSubset& s, const DetectorConfig& cfg) {
  if (cfg.eta) {
    if (!(*cfg.eta >= 0.0)) throw ConfigError("eta must be nonnegative");
    return *cfg.eta;
  }
  return EtaAuto(model, s, cfg.k, cfg.epsilon);
}

Matrix ExpectedResidueMatrix(const Matrix& O_s, const Matrix& M_s, const SteadyStateFilter& filter,
                             double sigma_v2) {
  Matrix expected = O_s * filter.ErrorCovariance() * O_s.transpose() + M_s;
  if (filter.mode == FilterMode::kFiltering) {
    const auto n = O_s.cols();
    const auto m = filter.subset.size();
    // Delta = sigma_v2 E1 L' O' with E1 picking row 0 of each sensor window.
    Matrix LO = filter.gain.transpose() * O_s.transpose();  // m x n|s|
    Matrix delta = Matrix::Zero(O_s.rows(), O_s.rows());
    for (Eigen::Index r = 0; r < m; ++r) delta.row(r * n) = sigma_v2 * LO.row(r);
    expected -= delta + delta.transpose();
  }
  return expected;
}

Matrix ExpectedResidueMatrix(const SystemModel& model, const SensorSubset& s,
                             const SteadyStateFilter& filter) {
  Matrix O = ObservabilityMatrix(model, s).stacked;
  return ExpectedResidueMatrix(O, NoiseCovarianceFromStack(O, model.n(), model.sigma_w2, model.sigma_v2),
                               filter, model.sigma_v2);
}

Matrix BlockResidues(const Trajectory& traj, const Matrix& O_s, const FilterRun& estimates) {
  Matrix ybar = BlockOutputWindow(traj, estimates.subset, estimates.t_start, estimates.length());
  ybar.noalias() -= O_s * estimates.estimates;
  return ybar;
}

Matrix SampleSecondMoment(const Matrix& residues) {
  const auto dim = residues.rows();
  Matrix out = Matrix::Zero(dim, dim);
  out.selfadjointView<Eigen::Lower>().rankUpdate(residues, 1.0 / residues.cols());
  return out.selfadjointView<Eigen::Lower>();
}

std::vector<Matrix> StratifiedSecondMoments(const Matrix& residues, int n) {
  std::vector<Matrix> out;
  const auto total = residues.cols();
  for (int l = 0; l < n; ++l) {
    const auto count = (total - l + n - 1) / n;
    Matrix part(residues.rows(), count);
    for (Eigen::Index j = 0; j < count; ++j) part.col(j) = residues.col(l + j * n);
    out.push_back(SampleSecondMoment(part));
  }
  return out;
}

std::vector<double> SensorLambdaMax(const std::vector<Matrix>& blocks) {
  std::vector<double> out;
  out.reserve(blocks.size());
  for (const Matrix& o : blocks) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(o.transpose() * o, Eigen::EigenvaluesOnly);
    out.push_back(eig.eigenvalues()(eig.eigenvalues().size() - 1));
  }
  return out;
}

ResidueReport EvaluateResidueTest(const std::vector<Matrix>& blocks,
                                  const std::vector<double>& lambda_max, const SensorSubset& s,
                                  Matrix sample, Matrix expected, double eta, FilterMode mode,
                                  int t1, int window) {
  const int n = static_cast<int>(blocks.front().rows());
  ResidueReport report;
  report.subset = s;
  report.mode = mode;
  report.t1 = t1;
  report.window = window;
  report.eta = eta;
  Matrix deviation = sample - expected;
  report.max_deviation = deviation.maxCoeff();
  report.passed = report.max_deviation <= eta;
  for (int r = 0; r < s.size(); ++r) {
    const double trace = deviation.block(r * n, r * n, n, n).trace();
    const double mu = std::abs(trace - eta * n);
    const double lmax = lambda_max[static_cast<size_t>(s[r] - 1)];
    report.per_sensor_mu.push_back(mu);
    report.per_sensor_mu_normalized.push_back(
        lmax > 0.0 ? mu / lmax : std::numeric_limits<double>::infinity());
  }
  report.sample_matrix = std::move(sample);
  report.expected_matrix = std::move(expected);
  return report;
}

ResidueReport EvaluateResidueTest(const SystemModel& model, const SensorSubset& s,
                                  Matrix sample, Matrix expected, double eta, FilterMode mode,
                                  int t1, int window) {
  auto blocks = SensorBlocks(model);
  return EvaluateResidueTest(blocks, SensorLambdaMax(blocks), s, std::move(sample),
                             std::move(expected), eta, mode, t1, window);
}

Detection AttackDetect(const SystemModel& model, const Trajectory& traj,
                       const SteadyStateFilter& filter, const DetectorConfig& cfg) {
  const SensorSubset& s = filter.subset;
  const int n = model.n();
  const int N = cfg.EffectiveWindow(n);
  const int t1 = cfg.StartTime(n);
  if (traj.horizon < cfg.RequiredHorizon(n)) {
    throw RangeError("horizon " + std::to_string(traj.horizon) + " too short; need " +
                     std::to_string(cfg.RequiredHorizon(n)) + " for t1 = " + std::to_string(t1) +
                     ", N = " + std::to_string(N));
  }
  if (filter.mode != cfg.mode) throw ConfigError("filter mode differs from the detector mode");
  const double eta = ResolveEta(model, s, cfg);

  auto run = std::make_shared<FilterRun>(RunFilter(filter, traj, t1, t1 + N - 1));
  Matrix O = ObservabilityMatrix(model, s).stacked;
  Matrix residues = BlockResidues(traj, O, *run);

  Detection out;
  out.report = EvaluateResidueTest(model, s, SampleSecondMoment(residues),
                                   ExpectedResidueMatrix(model, s, filter), eta, cfg.mode, t1, N);
  out.flag = out.report.passed ? 0 : 1;
  out.estimates = std::move(run);
  return out;
}

Detection AttackDetect(const SystemModel& model, const Trajectory& traj, const SensorSubset& s,
                       const DetectorConfig& cfg) {
  model.Validate();
  s.CheckAgainst(model.p());
  auto filter = SolveSteadyState(model, s, cfg.mode, cfg.riccati);
  return AttackDetect(model, traj, filter, cfg);
}

double SampleErrorTrace(const Trajectory& traj, const FilterRun& estimates, int t1, int window) {
  if (t1 < estimates.t_start || t1 + window > estimates.t_start + estimates.length()) {
    throw RangeError("oracle window outside the estimate range");
  }
  if (t1 + window > traj.horizon) throw RangeError("oracle window exceeds the horizon");
  double total = 0.0;
  for (int t = t1; t < t1 + window; ++t) {
    total += (traj.EffectiveState(t) - estimates.At(t)).squaredNorm();
  }
  return total / window;
}

bool EffectiveAttackOracle(const Trajectory& traj, const FilterRun& estimates,
                           const Matrix& P_ref, double epsilon, int t1, int window) {
  return SampleErrorTrace(traj, estimates, t1, window) > P_ref.trace() + epsilon;
}

}  // namespace secest
