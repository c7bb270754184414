#include "secest/model.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace secest {
namespace {

// Independent streams so adding an attack never perturbs the noise draws.
constexpr std::uint64_t kProcessStream = 1;
constexpr std::uint64_t kSensorStream = 2;
constexpr std::uint64_t kAttackStream = 3;
constexpr std::uint64_t kSystemStream = 4;
constexpr std::uint64_t kPickStream = 5;

}  // namespace

void SystemModel::Validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw DimensionError("A must be a nonempty square matrix");
  }
  if (C.rows() == 0 || C.cols() != A.rows()) {
    throw DimensionError("C must have n = " + std::to_string(A.rows()) + " columns");
  }
  if (B && B->rows() != A.rows()) {
    throw DimensionError("B must have n rows");
  }
  if (!(sigma_w2 >= 0.0) || !(sigma_v2 >= 0.0)) {
    throw ConfigError("noise variances must be nonnegative");
  }
  if (!A.allFinite() || !C.allFinite()) {
    throw ConfigError("system matrices contain non-finite entries");
  }
}

Matrix SystemModel::SubsetC(const SensorSubset& s) const {
  Matrix out(s.size(), C.cols());
  for (int r = 0; r < s.size(); ++r) out.row(r) = C.row(s[r] - 1);
  return out;
}

const char* ToString(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kZeroOutput:
      return "zero_output";
    case AttackKind::kNoiseLinear:
      return "noise_linear";
    case AttackKind::kConstant:
      return "constant";
    case AttackKind::kSeededRandom:
      return "random";
  }
  return "none";
}

AttackKind AttackKindFromString(const std::string& text) {
  if (text == "none") return AttackKind::kNone;
  if (text == "zero_output") return AttackKind::kZeroOutput;
  if (text == "noise_linear") return AttackKind::kNoiseLinear;
  if (text == "constant") return AttackKind::kConstant;
  if (text == "random") return AttackKind::kSeededRandom;
  throw ConfigError("unknown attack strategy '" + text + "'");
}

AttackSpec AttackSpec::ZeroOutput(std::vector<int> sensors) {
  AttackSpec a;
  a.attacked = std::move(sensors);
  a.kind = AttackKind::kZeroOutput;
  return a;
}

AttackSpec AttackSpec::NoiseLinear(std::vector<int> sensors, double gain) {
  AttackSpec a;
  a.attacked = std::move(sensors);
  a.kind = AttackKind::kNoiseLinear;
  a.gain = gain;
  return a;
}

AttackSpec AttackSpec::Constant(std::vector<int> sensors, std::vector<double> bias) {
  AttackSpec a;
  a.attacked = std::move(sensors);
  a.kind = AttackKind::kConstant;
  a.bias = std::move(bias);
  return a;
}

AttackSpec AttackSpec::SeededRandom(std::vector<int> sensors, double amplitude) {
  AttackSpec a;
  a.attacked = std::move(sensors);
  a.kind = AttackKind::kSeededRandom;
  a.amplitude = amplitude;
  return a;
}

void AttackSpec::Validate(int p) const {
  if (static_cast<int>(attacked.size()) > p) {
    throw ConfigError("attacked set larger than the sensor count");
  }
  std::vector<int> sorted = attacked;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("attacked set has duplicate sensors");
  }
  for (int j : attacked) {
    if (j < 1 || j > p) {
      throw RangeError("attacked sensor " + std::to_string(j) + " outside 1.." +
                       std::to_string(p));
    }
  }
  if (kind == AttackKind::kConstant && bias.size() != attacked.size()) {
    throw ConfigError("constant attack needs one bias per attacked sensor");
  }
}

Vector Trajectory::EffectiveOutput(int t) const {
  return outputs.col(t) - forced_outputs.col(t);
}

Vector Trajectory::EffectiveState(int t) const {
  return states.col(t) - forced_states.col(t);
}

int DefaultBurnIn(int n) { return 10 * n; }

GaussianSource::GaussianSource(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x5ec3u};
  engine_.seed(seq);
}

double GaussianSource::Next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 53-bit uniforms in (0, 1].
  constexpr double kScale = 1.0 / 9007199254740992.0;
  double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * kScale;
  double u2 = static_cast<double>(engine_() >> 11) * kScale;
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t GaussianSource::NextBelow(std::uint64_t bound) {
  // Rejection sampling for an unbiased draw.
  std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % bound;
}

Vector GaussianSource::NextVector(int size, double stddev) {
  Vector out(size);
  for (int i = 0; i < size; ++i) out(i) = stddev * Next();
  return out;
}

Trajectory Simulate(const SystemModel& model, const AttackSpec& attack, int horizon,
                    const Vector& x0, std::uint64_t seed, const SimulationOptions& options) {
  model.Validate();
  attack.Validate(model.p());
  if (horizon < 1) throw ConfigError("horizon must be positive");
  const int n = model.n();
  const int p = model.p();
  if (x0.size() != n) throw DimensionError("x0 must have n entries");
  if (options.inputs) {
    if (!model.B) throw ConfigError("inputs given but the model has no B matrix");
    if (options.inputs->rows() != model.B->cols() || options.inputs->cols() < horizon) {
      throw DimensionError("inputs must be m x horizon");
    }
  }

  GaussianSource process(seed, kProcessStream);
  GaussianSource sensor(seed, kSensorStream);
  GaussianSource adversary(seed, kAttackStream);
  const double sw = std::sqrt(model.sigma_w2);
  const double sv = std::sqrt(model.sigma_v2);

  Vector x = x0;
  for (int t = 0; t < options.burn_in; ++t) {
    x = model.A * x + process.NextVector(n, sw);
  }

  Trajectory traj;
  traj.horizon = horizon;
  traj.seed = seed;
  traj.states.resize(n, horizon);
  traj.clean_outputs.resize(p, horizon);
  traj.sensor_noise.resize(p, horizon);
  traj.process_noise.resize(n, horizon);
  traj.attack = Matrix::Zero(p, horizon);
  traj.outputs.resize(p, horizon);
  traj.forced_states = Matrix::Zero(n, horizon);
  traj.forced_outputs = Matrix::Zero(p, horizon);

  Vector forced = Vector::Zero(n);
  for (int t = 0; t < horizon; ++t) {
    traj.states.col(t) = x;
    traj.forced_states.col(t) = forced;
    traj.clean_outputs.col(t) = model.C * x;
    traj.forced_outputs.col(t) = model.C * forced;
    traj.sensor_noise.col(t) = sensor.NextVector(p, sv);
    traj.process_noise.col(t) = process.NextVector(n, sw);

    // The attack at t reads only quantities drawn at or before t.
    for (size_t idx = 0; idx < attack.attacked.size(); ++idx) {
      const int j = attack.attacked[idx] - 1;
      double a = 0.0;
      switch (attack.kind) {
        case AttackKind::kNone:
          break;
        case AttackKind::kZeroOutput:
          a = -(traj.clean_outputs(j, t) + traj.sensor_noise(j, t));
          break;
        case AttackKind::kNoiseLinear:
          a = attack.gain * traj.sensor_noise(j, t);
          break;
        case AttackKind::kConstant:
          a = attack.bias[idx];
          break;
        case AttackKind::kSeededRandom:
          a = attack.amplitude * adversary.Next();
          break;
      }
      traj.attack(j, t) = a;
    }
    traj.outputs.col(t) = traj.clean_outputs.col(t) + traj.sensor_noise.col(t) + traj.attack.col(t);

    Vector drive = traj.process_noise.col(t);
    if (options.inputs) {
      Vector bu = *model.B * options.inputs->col(t);
      drive += bu;
      forced = model.A * forced + bu;
    }
    x = model.A * x + drive;
  }
  return traj;
}

double SpectralRadius(const Matrix& A) {
  Eigen::EigenSolver<Matrix> solver(A, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SystemModel MakeRandomStableSystem(int n, int p, double spectral_radius, std::uint64_t seed,
                                   double sigma_w2, double sigma_v2) {
  if (n < 1 || p < 1) throw ConfigError("n and p must be positive");
  if (!(spectral_radius > 0.0 && spectral_radius < 1.0)) {
    throw ConfigError("spectral radius must lie in (0, 1)");
  }
  GaussianSource rng(seed, kSystemStream);
  SystemModel model;
  model.A.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) model.A(i, j) = rng.Next();
  }
  model.C.resize(p, n);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < n; ++j) model.C(i, j) = rng.Next();
  }
  double rho = SpectralRadius(model.A);
  if (rho == 0.0) throw AnalysisError("random A is nilpotent; pick another seed");
  model.A *= spectral_radius / rho;
  model.sigma_w2 = sigma_w2;
  model.sigma_v2 = sigma_v2;
  return model;
}

std::vector<int> RandomSensors(int p, int k, std::uint64_t seed) {
  if (k < 0 || k > p) throw ConfigError("cannot pick " + std::to_string(k) + " of " +
                                        std::to_string(p) + " sensors");
  GaussianSource rng(seed, kPickStream);
  std::vector<int> pool(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) pool[static_cast<size_t>(i)] = i + 1;
  // Partial Fisher-Yates.
  for (int i = 0; i < k; ++i) {
    auto j = static_cast<int>(rng.NextBelow(static_cast<std::uint64_t>(p - i))) + i;
    std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
  }
  std::vector<int> picked(pool.begin(), pool.begin() + k);
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace secest
