#include "oracles.h"

#include <sys/wait.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "secest/obsv.h"

namespace secest::testing {

namespace {

std::vector<int> TrueSet(std::uint64_t mask, int p) {
  std::vector<int> out;
  for (int i = 0; i < p; ++i) {
    if (mask >> i & 1U) out.push_back(i);
  }
  return out;
}

}  // namespace

std::optional<Assignment> BruteForceSolve(const PBFormula& formula) {
  const int p = formula.num_vars();
  std::optional<std::uint64_t> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    Assignment values(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) values[static_cast<size_t>(i)] = mask >> i & 1U;
    if (!formula.SatisfiedBy(values)) continue;
    if (!best) {
      best = mask;
      continue;
    }
    const int c = std::popcount(mask);
    const int b = std::popcount(*best);
    if (c < b || (c == b && TrueSet(mask, p) < TrueSet(*best, p))) best = mask;
  }
  if (!best) return std::nullopt;
  Assignment out(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) out[static_cast<size_t>(i)] = *best >> i & 1U;
  return out;
}

long CountSolutions(const PBFormula& formula) {
  const int p = formula.num_vars();
  long count = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    Assignment values(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i) values[static_cast<size_t>(i)] = mask >> i & 1U;
    if (formula.SatisfiedBy(values)) ++count;
  }
  return count;
}

double ScalarDareRoot(double a, int m, double sigma_w2, double sigma_v2) {
  const double qa = m;
  const double qb = sigma_v2 * (1.0 - a * a) - m * sigma_w2;
  const double qc = -sigma_w2 * sigma_v2;
  return (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
}

SystemModel RandomModel(int n, int p, std::uint64_t seed, double spectral_radius,
                        double sigma_w2, double sigma_v2) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    SystemModel model =
        MakeRandomStableSystem(n, p, spectral_radius, seed + 7919 * attempt, sigma_w2, sigma_v2);
    if (IsObservable(model, SensorSubset::Full(p))) return model;
  }
}

MonteCarloEstimate DeltaMonteCarlo(const SystemModel& model, const SensorSubset& s,
                                   const SteadyStateFilter& filter, long samples,
                                   std::uint64_t seed) {
  const int n = model.n();
  const int rows = n * s.size();
  const Matrix J = ComputeNoiseStructure(model, s).J;
  const Matrix OL = ObservabilityMatrix(model, s).stacked * filter.gain;
  const double sw = std::sqrt(model.sigma_w2);
  const double sv = std::sqrt(model.sigma_v2);

  GaussianSource rng(seed, 0);
  Matrix sum = Matrix::Zero(rows, rows);
  Matrix sum_sq = Matrix::Zero(rows, rows);
  Vector v_first(s.size());
  for (long i = 0; i < samples; ++i) {
    const Vector wbar = rng.NextVector(n * n, sw);
    const Vector vbar = rng.NextVector(rows, sv);
    for (int r = 0; r < s.size(); ++r) v_first(r) = vbar(r * n);
    const Vector z = J * wbar + vbar;
    const Vector u = OL * v_first;
    const Matrix x = z * u.transpose();
    sum += x;
    sum_sq += x.cwiseProduct(x);
  }
  const double count = static_cast<double>(samples);
  MonteCarloEstimate out;
  out.mean = sum / count;
  const Matrix var = (sum_sq / count - out.mean.cwiseProduct(out.mean)) * (count / (count - 1.0));
  out.standard_error = (var.cwiseMax(0.0) / count).cwiseSqrt();
  return out;
}

bool IdealTheory::Passes(const SensorSubset& s) const {
  for (int i : s) {
    if (attacked_.count(i)) return false;
  }
  return true;
}

Detection IdealTheory::Check(const SensorSubset& s) {
  log_.push_back(s);
  if (untestable_.count(s.Mask())) {
    throw AnalysisError("subset " + s.ToString() + " is untestable");
  }
  Detection d;
  d.flag = Passes(s) ? 0 : 1;
  d.report.subset = s;
  d.report.passed = d.flag == 0;
  d.report.eta = 1.0;
  d.report.max_deviation = d.flag == 0 ? 0.0 : 10.0;
  for (int i : s) {
    const double mu = attacked_.count(i) ? 100.0 + i : 1.0 + 0.01 * i;
    d.report.per_sensor_mu.push_back(mu);
    d.report.per_sensor_mu_normalized.push_back(mu);
  }
  return d;
}

CliResult RunCli(const std::string& args) {
  const std::string command = std::string(SECEST_CLI) + " " + args + " 2>&1";
  CliResult result;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer{};
  size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::path(SECEST_SCRATCH) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace secest::testing
