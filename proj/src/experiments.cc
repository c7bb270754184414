#include "secest/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace secest {
namespace {

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd Summarize(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  for (double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

bool AvoidsAll(const SensorSubset& s, const std::vector<int>& attacked) {
  return std::none_of(attacked.begin(), attacked.end(), [&](int j) { return s.contains(j); });
}

std::string JoinSensors(const std::vector<int>& sensors) {
  std::string out;
  for (size_t i = 0; i < sensors.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(sensors[i]);
  }
  return out;
}

Vector InitialState(const Scenario& sc, int n) { return sc.x0 ? *sc.x0 : Vector::Zero(n); }

int ScenarioK(const Scenario& sc, int p) {
  const int k = sc.k_given ? sc.k : SweepK(sc, p);
  if (k >= p) throw ConfigError("k must be smaller than p");
  return k;
}

Json TrialSearchJson(const SearchOutcome& o) {
  Json j;
  j["found"] = o.found;
  j["subset"] = o.found ? ToJson(o.subset) : Json(nullptr);
  j["theory_checks"] = o.theory_checks;
  j["hypotheses"] = o.hypotheses;
  j["certificates"] = o.certificates.size();
  return j;
}

}  // namespace

Exp1Result RunExperiment1(const Scenario& sc) {
  const SystemModel model = BuildModel(sc);
  const int n = model.n();
  const int p = model.p();
  const int k = ScenarioK(sc, p);
  DetectorConfig cfg = sc.detector;
  cfg.k = k;
  const int horizon = ScenarioHorizon(sc, n);
  const auto subsets = AllSubsets(p, p - k);
  auto cache = std::make_shared<SubsetModelCache>(model, cfg);

  Exp1Result result;
  result.n = n;
  result.p = p;
  result.k = k;
  result.runs.resize(static_cast<size_t>(sc.repetitions));

  auto run_one = [&](int rep) {
    Exp1Run& run = result.runs[static_cast<size_t>(rep)];
    run.seed = RepetitionSeed(sc.seed, rep);
    const AttackSpec attack = BuildAttack(sc, p, k, run.seed);
    run.attacked = attack.attacked;
    std::sort(run.attacked.begin(), run.attacked.end());
    const Trajectory traj = Simulate(model, attack, horizon, InitialState(sc, n), run.seed);
    DetectionBank bank(cache, traj, cfg);
    SensorSubset passing;
    for (const auto& s : subsets) {
      const Detection d = bank.Check(s);
      run.rows.push_back({s, d.report.max_deviation, d.report.eta, d.report.passed});
      if (d.report.passed) {
        ++run.passing;
        passing = s;
      }
    }
    run.unique_attack_free = run.passing == 1 && AvoidsAll(passing, run.attacked);
  };

  // Runs are independent; results land in their own slots, so the output
  // does not depend on the schedule.
  const int workers = std::max(1, std::min(ThreadBudget(), sc.repetitions));
  if (workers == 1) {
    for (int rep = 0; rep < sc.repetitions; ++rep) run_one(rep);
  } else {
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int rep = next++; rep < sc.repetitions; rep = next++) {
          try {
            run_one(rep);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  int good = 0;
  for (const auto& run : result.runs) good += run.unique_attack_free ? 1 : 0;
  result.unique_attack_free_rate = static_cast<double>(good) / sc.repetitions;
  return result;
}

std::string Exp1Csv(const Exp1Result& result) {
  std::ostringstream out;
  out << "schema_version,rep,seed,attacked,subset,max_deviation,eta,passed\n";
  for (size_t r = 0; r < result.runs.size(); ++r) {
    const Exp1Run& run = result.runs[r];
    for (const auto& row : run.rows) {
      out << kSchemaVersion << ',' << r << ',' << run.seed << ',' << JoinSensors(run.attacked) << ','
          << JoinSensors(row.subset.indices()) << ',' << FormatDouble(row.max_deviation) << ','
          << FormatDouble(row.eta) << ',' << (row.passed ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

Json Exp1Json(const Exp1Result& result) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = result.n;
  j["p"] = result.p;
  j["k"] = result.k;
  j["unique_attack_free_rate"] = result.unique_attack_free_rate;
  Json runs = Json::array();
  for (const auto& run : result.runs) {
    Json r;
    r["seed"] = run.seed;
    r["attacked"] = run.attacked;
    r["passing"] = run.passing;
    r["unique_attack_free"] = run.unique_attack_free;
    Json rows = Json::array();
    for (const auto& row : run.rows) {
      rows.push_back({{"subset", ToJson(row.subset)},
                      {"max_deviation", row.max_deviation},
                      {"eta", row.eta},
                      {"passed", row.passed}});
    }
    r["rows"] = std::move(rows);
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);
  return j;
}

Exp2Result RunExperiment2(const Scenario& sc, const Exp2Observer& observer) {
  if (sc.sweep_p.empty()) throw ConfigError("experiment 2 needs sweep.p");
  if (!sc.random_model) throw ConfigError("experiment 2 needs a random model");
  Exp2Result result;
  result.n = sc.random_model->n;
  for (int p : sc.sweep_p) {
    const SystemModel model = BuildModel(sc, p);
    const int n = model.n();
    const int k = ScenarioK(sc, p);
    DetectorConfig cfg = sc.detector;
    cfg.k = k;
    const int horizon = ScenarioHorizon(sc, n);
    // Per-subset filters depend only on the model: shared by every repetition.
    auto cache = std::make_shared<SubsetModelCache>(model, cfg);
    std::vector<double> t_exh, t_smt, c_exh, c_smt;
    int found_exh = 0, found_smt = 0, ok_exh = 0, ok_smt = 0;
    for (int rep = 0; rep < sc.repetitions; ++rep) {
      Exp2Trial trial;
      trial.p = p;
      trial.k = k;
      trial.rep = rep;
      trial.seed = RepetitionSeed(RepetitionSeed(sc.seed, p), rep);
      const AttackSpec attack = BuildAttack(sc, p, k, trial.seed);
      trial.attacked = attack.attacked;
      std::sort(trial.attacked.begin(), trial.attacked.end());
      const Trajectory traj = Simulate(model, attack, horizon, InitialState(sc, n), trial.seed);
      DetectionBank bank(cache, traj, cfg);
      trial.exhaustive = ExhaustiveSearch(bank, p, k);
      trial.smt = SmtSearch(bank, p, k);
      if (observer) observer({model, traj, cfg, trial});
      trial.exhaustive.estimates.reset();
      trial.smt.estimates.reset();

      t_exh.push_back(trial.exhaustive.wall_time);
      t_smt.push_back(trial.smt.wall_time);
      c_exh.push_back(static_cast<double>(trial.exhaustive.theory_checks));
      c_smt.push_back(static_cast<double>(trial.smt.theory_checks));
      found_exh += trial.exhaustive.found;
      found_smt += trial.smt.found;
      ok_exh += trial.exhaustive.found && AvoidsAll(trial.exhaustive.subset, trial.attacked);
      ok_smt += trial.smt.found && AvoidsAll(trial.smt.subset, trial.attacked);
      result.trials.push_back(std::move(trial));
    }
    Exp2Row row;
    row.p = p;
    row.k = k;
    row.reps = sc.repetitions;
    const double reps = sc.repetitions;
    auto te = Summarize(t_exh), ts = Summarize(t_smt), ce = Summarize(c_exh), cs = Summarize(c_smt);
    row.mean_time_exhaustive = te.mean;
    row.sd_time_exhaustive = te.sd;
    row.mean_time_smt = ts.mean;
    row.sd_time_smt = ts.sd;
    row.mean_checks_exhaustive = ce.mean;
    row.sd_checks_exhaustive = ce.sd;
    row.mean_checks_smt = cs.mean;
    row.sd_checks_smt = cs.sd;
    row.found_rate_exhaustive = found_exh / reps;
    row.found_rate_smt = found_smt / reps;
    row.correct_rate_exhaustive = ok_exh / reps;
    row.correct_rate_smt = ok_smt / reps;
    result.rows.push_back(row);
  }
  return result;
}

std::string Exp2Csv(const Exp2Result& result) {
  std::ostringstream out;
  out << "schema_version,n,p,k,reps,mean_checks_exhaustive,sd_checks_exhaustive,mean_checks_smt,"
         "sd_checks_smt,found_rate_exhaustive,found_rate_smt,correct_rate_exhaustive,correct_rate_smt\n";
  for (const auto& r : result.rows) {
    out << kSchemaVersion << ',' << result.n << ',' << r.p << ',' << r.k << ',' << r.reps << ','
        << FormatDouble(r.mean_checks_exhaustive) << ',' << FormatDouble(r.sd_checks_exhaustive) << ','
        << FormatDouble(r.mean_checks_smt) << ',' << FormatDouble(r.sd_checks_smt) << ','
        << FormatDouble(r.found_rate_exhaustive) << ',' << FormatDouble(r.found_rate_smt) << ','
        << FormatDouble(r.correct_rate_exhaustive) << ',' << FormatDouble(r.correct_rate_smt) << '\n';
  }
  return out.str();
}

std::string Exp2TimingCsv(const Exp2Result& result) {
  std::ostringstream out;
  out << "schema_version,n,p,k,reps,mean_time_exhaustive,sd_time_exhaustive,mean_time_smt,sd_time_smt,"
         "mean_checks_exhaustive,mean_checks_smt\n";
  for (const auto& r : result.rows) {
    out << kSchemaVersion << ',' << result.n << ',' << r.p << ',' << r.k << ',' << r.reps << ','
        << FormatDouble(r.mean_time_exhaustive) << ',' << FormatDouble(r.sd_time_exhaustive) << ','
        << FormatDouble(r.mean_time_smt) << ',' << FormatDouble(r.sd_time_smt) << ','
        << FormatDouble(r.mean_checks_exhaustive) << ',' << FormatDouble(r.mean_checks_smt) << '\n';
  }
  return out.str();
}

std::string Exp2TrialsCsv(const Exp2Result& result) {
  std::ostringstream out;
  out << "schema_version,p,k,rep,seed,attacked,exhaustive_found,exhaustive_subset,exhaustive_checks,"
         "smt_found,smt_subset,smt_checks,smt_hypotheses,smt_certificates\n";
  for (const auto& t : result.trials) {
    out << kSchemaVersion << ',' << t.p << ',' << t.k << ',' << t.rep << ',' << t.seed << ','
        << JoinSensors(t.attacked) << ',' << (t.exhaustive.found ? 1 : 0) << ','
        << JoinSensors(t.exhaustive.subset.indices()) << ',' << t.exhaustive.theory_checks << ','
        << (t.smt.found ? 1 : 0) << ',' << JoinSensors(t.smt.subset.indices()) << ','
        << t.smt.theory_checks << ',' << t.smt.hypotheses << ',' << t.smt.certificates.size() << '\n';
  }
  return out.str();
}

Json Exp2Json(const Exp2Result& result, bool timing) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = result.n;
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    Json row;
    row["p"] = r.p;
    row["k"] = r.k;
    row["reps"] = r.reps;
    row["mean_checks_exhaustive"] = r.mean_checks_exhaustive;
    row["sd_checks_exhaustive"] = r.sd_checks_exhaustive;
    row["mean_checks_smt"] = r.mean_checks_smt;
    row["sd_checks_smt"] = r.sd_checks_smt;
    row["found_rate_exhaustive"] = r.found_rate_exhaustive;
    row["found_rate_smt"] = r.found_rate_smt;
    row["correct_rate_exhaustive"] = r.correct_rate_exhaustive;
    row["correct_rate_smt"] = r.correct_rate_smt;
    if (timing) {
      row["mean_time_exhaustive"] = r.mean_time_exhaustive;
      row["sd_time_exhaustive"] = r.sd_time_exhaustive;
      row["mean_time_smt"] = r.mean_time_smt;
      row["sd_time_smt"] = r.sd_time_smt;
    }
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  Json trials = Json::array();
  for (const auto& t : result.trials) {
    Json tj;
    tj["p"] = t.p;
    tj["k"] = t.k;
    tj["rep"] = t.rep;
    tj["seed"] = t.seed;
    tj["attacked"] = t.attacked;
    tj["exhaustive"] = TrialSearchJson(t.exhaustive);
    tj["smt"] = TrialSearchJson(t.smt);
    trials.push_back(std::move(tj));
  }
  j["trials"] = std::move(trials);
  return j;
}

Json RunScenario(const Scenario& sc, bool timing) {
  const SystemModel model = BuildModel(sc);
  const int n = model.n();
  const int p = model.p();
  const int k = sc.k;
  if (k >= p) throw ConfigError("k must be smaller than p");
  DetectorConfig cfg = sc.detector;
  cfg.k = k;
  const AttackSpec attack = BuildAttack(sc, p, k, RepetitionSeed(sc.seed, 0));
  const Trajectory traj = Simulate(model, attack, ScenarioHorizon(sc, n), InitialState(sc, n), sc.seed);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["name"] = sc.name;
  j["n"] = n;
  j["p"] = p;
  j["k"] = k;
  j["seed"] = sc.seed;
  j["attack"] = ToJson(attack);
  Json outcomes = Json::array();
  if (sc.search != SearchMethod::kSmt) outcomes.push_back(ToJson(ExhaustiveSearch(model, traj, k, cfg), timing));
  if (sc.search != SearchMethod::kExhaustive) outcomes.push_back(ToJson(SmtSearch(model, traj, k, cfg), timing));
  j["outcomes"] = std::move(outcomes);
  return j;
}

}  // namespace secest
