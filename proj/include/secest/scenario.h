#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "secest/detect.h"
#include "secest/model.h"
#include "secest/report_io.h"

namespace secest {

struct RandomModelSpec {
  int n = 0;
  int p = 0;
  double spectral_radius = 0.9;
  std::uint64_t seed = 0;
};

/// Attack as written in a scenario. Without explicit sensors, k of them are
/// drawn per repetition.
struct AttackScenario {
  AttackKind kind = AttackKind::kNone;
  std::optional<std::vector<int>> sensors;
  double gain = 0.0;
  double amplitude = 0.0;
  std::vector<double> bias;
};

/// A replaced symbol for decode-noiseless: sensor d reports O_d x instead.
struct SymbolCorruption {
  int sensor = 0;
  Vector x;
};

struct NoiselessScenario {
  Vector x0;
  std::vector<SymbolCorruption> corruptions;
};

enum class SearchMethod { kExhaustive, kSmt, kBoth };

struct Scenario {
  std::string name;
  std::optional<RandomModelSpec> random_model;
  std::optional<SystemModel> explicit_model;
  double sigma_w2 = 1.0;
  double sigma_v2 = 1.0;
  AttackScenario attack;
  DetectorConfig detector;
  SearchMethod search = SearchMethod::kBoth;
  int k = 0;
  /// Experiment sweeps derive k as floor(p / 3) unless k is given.
  bool k_given = false;
  int repetitions = 1;
  std::uint64_t seed = 1;
  std::optional<int> horizon;
  std::optional<Vector> x0;
  std::vector<int> sweep_p;
  std::optional<NoiselessScenario> noiseless;
  std::string output_dir = ".";
  std::string format = "json";
};

/// Throws ParseError naming the line/column (syntax) or the field path.
Scenario ParseScenario(const std::string& text);
Scenario LoadScenario(const std::string& path);

/// Model for the scenario; `p_override` replaces p of a random model.
SystemModel BuildModel(const Scenario& sc, std::optional<int> p_override = std::nullopt);

/// Attack for one repetition. Random sensor sets are drawn from `rep_seed`.
AttackSpec BuildAttack(const Scenario& sc, int p, int k, std::uint64_t rep_seed);

/// Seed of repetition `rep` (0-based), reproducible from the scenario seed.
std::uint64_t RepetitionSeed(std::uint64_t base, int rep);

/// k for a given p: explicit k, else floor(p / 3).
int SweepK(const Scenario& sc, int p);

/// Horizon covering the detector window (or the explicit horizon).
int ScenarioHorizon(const Scenario& sc, int n);

const char* ToString(SearchMethod method);

}  // namespace secest
