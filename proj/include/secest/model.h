#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "secest/common.h"

namespace secest {

/// Plant x(t+1) = A x(t) + B u(t) + w(t), y(t) = C x(t) + v(t) + a(t) with
/// w ~ N(0, sigma_w2 I) and v ~ N(0, sigma_v2 I).
struct SystemModel {
  Matrix A;
  Matrix C;
  double sigma_w2 = 1.0;
  double sigma_v2 = 1.0;
  std::optional<Matrix> B;

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(C.rows()); }

  /// Dimension and variance checks; throws DimensionError / ConfigError.
  void Validate() const;

  /// Rows of C selected by the subset, ascending.
  Matrix SubsetC(const SensorSubset& s) const;
};

enum class AttackKind { kNone, kZeroOutput, kNoiseLinear, kConstant, kSeededRandom };

const char* ToString(AttackKind kind);
AttackKind AttackKindFromString(const std::string& text);

/// Static k-adversary: a fixed attacked set plus a causal signal generator.
struct AttackSpec {
  std::vector<int> attacked;  // 1-based
  AttackKind kind = AttackKind::kNone;
  double gain = 0.0;          // NoiseLinear: a_j(t) = gain * v_j(t)
  std::vector<double> bias;   // Constant: one entry per attacked sensor, in listed order
  double amplitude = 0.0;     // SeededRandom: a_j(t) = amplitude * N(0, 1)

  static AttackSpec None() { return {}; }
  static AttackSpec ZeroOutput(std::vector<int> sensors);
  static AttackSpec NoiseLinear(std::vector<int> sensors, double gain);
  static AttackSpec Constant(std::vector<int> sensors, std::vector<double> bias);
  static AttackSpec SeededRandom(std::vector<int> sensors, double amplitude);

  void Validate(int p) const;
};

/// Simulated run. Columns are time steps 0..T-1.
struct Trajectory {
  int horizon = 0;
  std::uint64_t seed = 0;
  Matrix states;          // n x T
  Matrix clean_outputs;   // p x T, C x(t)
  Matrix sensor_noise;    // p x T, v(t)
  Matrix process_noise;   // n x T, w(t) (drives x(t+1))
  Matrix attack;          // p x T, a(t)
  Matrix outputs;         // p x T, C x + v + a
  // Response to known inputs alone (zero when B/u are absent). Estimation
  // works on the input-free part: outputs - forced_outputs.
  Matrix forced_states;   // n x T
  Matrix forced_outputs;  // p x T

  int n() const { return static_cast<int>(states.rows()); }
  int p() const { return static_cast<int>(outputs.rows()); }

  /// y(t) with the known-input response removed.
  Vector EffectiveOutput(int t) const;
  /// x(t) with the known-input response removed.
  Vector EffectiveState(int t) const;
};

struct SimulationOptions {
  /// Steps propagated (and discarded) before t = 0 so x(0) is near stationary.
  int burn_in = 0;
  /// Known inputs u(t), m x horizon; requires model.B.
  std::optional<Matrix> inputs;
};

/// Burn-in used by detector-oriented simulations: 10 n.
int DefaultBurnIn(int n);

Trajectory Simulate(const SystemModel& model, const AttackSpec& attack, int horizon,
                    const Vector& x0, std::uint64_t seed,
                    const SimulationOptions& options = {});

/// A with standard-normal entries rescaled to the requested spectral radius; C
/// standard normal.
SystemModel MakeRandomStableSystem(int n, int p, double spectral_radius, std::uint64_t seed,
                                   double sigma_w2 = 1.0, double sigma_v2 = 1.0);

double SpectralRadius(const Matrix& A);

/// Gaussian source: mt19937_64 with Box-Muller, so draws do not depend on the
/// standard library's normal_distribution implementation.
class GaussianSource {
 public:
  GaussianSource(std::uint64_t seed, std::uint64_t stream);

  double Next();
  std::uint64_t NextBits() { return engine_(); }
  /// Uniform integer in [0, bound).
  std::uint64_t NextBelow(std::uint64_t bound);
  Vector NextVector(int size, double stddev);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// k distinct sensors from {1..p}, sorted, drawn from the given seed.
std::vector<int> RandomSensors(int p, int k, std::uint64_t seed);

}  // namespace secest
