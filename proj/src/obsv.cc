#include "secest/obsv.h"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace secest {

std::vector<Matrix> SensorBlocks(const SystemModel& model) {
  model.Validate();
  const int n = model.n();
  const int p = model.p();
  std::vector<Matrix> blocks(static_cast<size_t>(p), Matrix(n, n));
  // Rows C A^j for all sensors at once.
  Matrix power_rows = model.C;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < p; ++i) blocks[static_cast<size_t>(i)].row(j) = power_rows.row(i);
    if (j + 1 < n) power_rows = power_rows * model.A;
  }
  return blocks;
}

Matrix StackBlocks(const std::vector<Matrix>& blocks, const SensorSubset& s) {
  const int n = static_cast<int>(blocks.front().rows());
  Matrix out(n * s.size(), blocks.front().cols());
  for (int r = 0; r < s.size(); ++r) {
    out.middleRows(r * n, n) = blocks[static_cast<size_t>(s[r] - 1)];
  }
  return out;
}

ObservabilityBundle ObservabilityMatrix(const SystemModel& model, const SensorSubset& s) {
  s.CheckAgainst(model.p());
  auto all = SensorBlocks(model);
  ObservabilityBundle bundle;
  bundle.subset = s;
  for (int i : s) bundle.blocks.push_back(all[static_cast<size_t>(i - 1)]);
  bundle.stacked = StackBlocks(all, s);
  return bundle;
}

int NumericalRank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double cutoff = kRankTolerance * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

bool IsObservable(const SystemModel& model, const SensorSubset& s) {
  return NumericalRank(ObservabilityMatrix(model, s).stacked) == model.n();
}

int SparseObservabilityIndex(const SystemModel& model, int max_sensors) {
  model.Validate();
  const int p = model.p();
  const int n = model.n();
  if (p > max_sensors) {
    throw ConfigError("sparse observability is exhaustive; p = " + std::to_string(p) +
                      " exceeds the cap of " + std::to_string(max_sensors));
  }
  auto blocks = SensorBlocks(model);
  auto observable = [&](const SensorSubset& s) {
    return NumericalRank(StackBlocks(blocks, s)) == n;
  };
  if (!observable(SensorSubset::Full(p))) return -1;
  // Observability is inherited by supersets, so scan sizes downward and stop
  // at the first size with an unobservable member.
  int smallest_ok = p;
  for (int size = p - 1; size >= 1; --size) {
    bool all_ok = true;
    ForEachSubset(p, size, [&](const SensorSubset& s) {
      all_ok = observable(s);
      return all_ok;
    });
    if (!all_ok) break;
    smallest_ok = size;
  }
  return p - smallest_ok;
}

double LambdaMinSMinusK(const SystemModel& model, const SensorSubset& s, int k) {
  s.CheckAgainst(model.p());
  if (k < 0 || s.size() <= k) {
    throw ConfigError("lambda_min needs |s| > k >= 0 (|s| = " + std::to_string(s.size()) +
                      ", k = " + std::to_string(k) + ")");
  }
  auto blocks = SensorBlocks(model);
  std::vector<Matrix> grams;
  grams.reserve(static_cast<size_t>(s.size()));
  for (int i : s) {
    const Matrix& o = blocks[static_cast<size_t>(i - 1)];
    grams.push_back(o.transpose() * o);
  }
  double best = std::numeric_limits<double>::infinity();
  ForEachSubset(s.size(), s.size() - k, [&](const SensorSubset& positions) {
    Matrix gram = Matrix::Zero(model.n(), model.n());
    for (int pos : positions) gram += grams[static_cast<size_t>(pos - 1)];
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    best = std::min(best, eig.eigenvalues()(0));
    return true;
  });
  return std::max(best, 0.0);
}

Matrix SensorNoiseBlock(const SystemModel& model, int sensor) {
  const int n = model.n();
  Matrix J = Matrix::Zero(n, n * n);
  // powers[m] = C_i A^m
  std::vector<Eigen::RowVectorXd> powers;
  Eigen::RowVectorXd row = model.C.row(sensor - 1);
  for (int m = 0; m < n; ++m) {
    powers.push_back(row);
    row = row * model.A;
  }
  for (int j = 1; j < n; ++j) {
    for (int l = 0; l < j; ++l) {
      J.block(j, l * n, 1, n) = powers[static_cast<size_t>(j - 1 - l)];
    }
  }
  return J;
}

NoiseStructure ComputeNoiseStructure(const SystemModel& model, const SensorSubset& s) {
  model.Validate();
  s.CheckAgainst(model.p());
  const int n = model.n();
  NoiseStructure out;
  out.J.resize(n * s.size(), n * n);
  for (int r = 0; r < s.size(); ++r) out.J.middleRows(r * n, n) = SensorNoiseBlock(model, s[r]);
  out.M = model.sigma_w2 * out.J * out.J.transpose();
  out.M.diagonal().array() += model.sigma_v2;
  return out;
}

Matrix NoiseCovarianceFromStack(const Matrix& O_s, int n, double sigma_w2, double sigma_v2) {
  const auto dim = O_s.rows();
  const auto m = dim / n;
  Matrix K = Matrix::Zero(dim, dim);
  K.selfadjointView<Eigen::Lower>().rankUpdate(O_s);
  K = K.selfadjointView<Eigen::Lower>();
  Matrix G = Matrix::Zero(dim, dim);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index q = 0; q < m; ++q) {
      auto g = G.block(r * n, q * n, n, n);
      auto k = K.block(r * n, q * n, n, n);
      for (int a = 1; a < n; ++a) {
        for (int b = 1; b < n; ++b) g(a, b) = g(a - 1, b - 1) + k(a - 1, b - 1);
      }
    }
  }
  Matrix M = sigma_w2 * G;
  M.diagonal().array() += sigma_v2;
  return M;
}

Matrix NoiseCovariance(const SystemModel& model, const SensorSubset& s) {
  model.Validate();
  s.CheckAgainst(model.p());
  return NoiseCovarianceFromStack(ObservabilityMatrix(model, s).stacked, model.n(), model.sigma_w2,
                                  model.sigma_v2);
}

Vector BlockOutputs(const Trajectory& traj, const SensorSubset& s, int t) {
  return BlockOutputWindow(traj, s, t, 1).col(0);
}

Matrix BlockOutputWindow(const Trajectory& traj, const SensorSubset& s, int t_begin,
                         int count) {
  const int n = traj.n();
  s.CheckAgainst(traj.p());
  if (t_begin < 0 || count < 1 || t_begin + count - 1 + n - 1 >= traj.horizon) {
    throw RangeError("output window [" + std::to_string(t_begin) + ", " +
                     std::to_string(t_begin + count - 1 + n - 1) + "] exceeds horizon " +
                     std::to_string(traj.horizon));
  }
  Matrix out(n * s.size(), count);
  for (int r = 0; r < s.size(); ++r) {
    const int i = s[r] - 1;
    for (int j = 0; j < n; ++j) {
      out.row(r * n + j) = traj.outputs.row(i).segment(t_begin + j, count) -
                           traj.forced_outputs.row(i).segment(t_begin + j, count);
    }
  }
  return out;
}

}  // namespace secest
