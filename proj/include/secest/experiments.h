#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "secest/scenario.h"
#include "secest/search.h"

namespace secest {

struct Exp1Row {
  SensorSubset subset;
  double max_deviation = 0.0;
  double eta = 0.0;
  bool passed = false;
};

struct Exp1Run {
  std::uint64_t seed = 0;
  std::vector<int> attacked;
  std::vector<Exp1Row> rows;
  int passing = 0;
  /// Exactly one subset passes and it avoids every attacked sensor.
  bool unique_attack_free = false;
};

struct Exp1Result {
  int n = 0;
  int p = 0;
  int k = 0;
  std::vector<Exp1Run> runs;
  double unique_attack_free_rate = 0.0;
};

/// Residue test on every (p-k)-subset, one run per repetition. The model is
/// fixed by the scenario; noise seed and random attacked sets vary per run.
Exp1Result RunExperiment1(const Scenario& sc);
std::string Exp1Csv(const Exp1Result& result);
Json Exp1Json(const Exp1Result& result);

struct Exp2Trial {
  int p = 0;
  int k = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::vector<int> attacked;
  /// Estimates are dropped to bound memory; the traces are kept.
  SearchOutcome exhaustive;
  SearchOutcome smt;
};

struct Exp2Row {
  int p = 0;
  int k = 0;
  int reps = 0;
  double mean_time_exhaustive = 0.0;
  double sd_time_exhaustive = 0.0;
  double mean_time_smt = 0.0;
  double sd_time_smt = 0.0;
  double mean_checks_exhaustive = 0.0;
  double sd_checks_exhaustive = 0.0;
  double mean_checks_smt = 0.0;
  double sd_checks_smt = 0.0;
  double found_rate_exhaustive = 0.0;
  double found_rate_smt = 0.0;
  /// Fraction of runs whose subset avoids every attacked sensor.
  double correct_rate_exhaustive = 0.0;
  double correct_rate_smt = 0.0;
};

struct Exp2Result {
  int n = 0;
  std::vector<Exp2Trial> trials;
  std::vector<Exp2Row> rows;
};

/// Everything needed to re-check one trial independently of the bank.
struct Exp2TrialContext {
  const SystemModel& model;
  const Trajectory& traj;
  const DetectorConfig& cfg;
  const Exp2Trial& trial;
};
using Exp2Observer = std::function<void(const Exp2TrialContext&)>;

/// Both searches per p of the sweep (k = floor(p/3) unless given) and per
/// repetition, sharing one lazily built filter bank per trajectory. Runs are
/// sequential so that timings are not disturbed.
Exp2Result RunExperiment2(const Scenario& sc, const Exp2Observer& observer = {});

/// Deterministic summary: checks and rates, no timings.
std::string Exp2Csv(const Exp2Result& result);
/// Wall-time means and standard deviations per p.
std::string Exp2TimingCsv(const Exp2Result& result);
/// One row per trial, deterministic columns only.
std::string Exp2TrialsCsv(const Exp2Result& result);
Json Exp2Json(const Exp2Result& result, bool timing);

/// One-shot pipeline: simulate, search with the configured method(s), and
/// bundle outcomes (with residue reports) as JSON.
Json RunScenario(const Scenario& sc, bool timing);

}  // namespace secest
