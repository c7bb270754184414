// secest: command-line front end for simulation, detection, subset search,
// the experiment harness and the noiseless decoder.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "secest/experiments.h"
#include "secest/kalman.h"
#include "secest/noiseless.h"
#include "secest/obsv.h"
#include "secest/pbsat.h"
#include "secest/report_io.h"
#include "secest/scenario.h"

namespace {

using namespace secest;

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAnalysis = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<int> reps;
  bool timing = false;
};

void AddCommon(CLI::App* cmd, CommonFlags& f, bool needs_scenario = true) {
  auto* opt = cmd->add_option("--scenario", f.scenario, "scenario JSON file");
  if (needs_scenario) opt->required();
  cmd->add_option("--seed", f.seed, "override the scenario seed");
  cmd->add_option("--out", f.out, "output directory (must exist)");
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--reps", f.reps, "override the repetition count")->check(CLI::PositiveNumber);
}

Scenario Load(const CommonFlags& f) {
  Scenario sc = LoadScenario(f.scenario);
  if (f.seed) sc.seed = *f.seed;
  if (f.out) sc.output_dir = *f.out;
  if (f.format) sc.format = *f.format;
  if (f.reps) sc.repetitions = *f.reps;
  // Fail before any computation rather than after it.
  if (!std::filesystem::is_directory(sc.output_dir.empty() ? "." : sc.output_dir)) {
    throw IoError("output directory '" + sc.output_dir + "' does not exist");
  }
  return sc;
}

std::string OutPath(const Scenario& sc, const std::string& stem, const std::string& ext) {
  std::string dir = sc.output_dir.empty() ? "." : sc.output_dir;
  if (dir.back() != '/') dir += '/';
  return dir + stem + "." + ext;
}

void Emit(const Scenario& sc, const std::string& stem, const Json& json, const std::string& csv) {
  const bool as_json = sc.format == "json";
  const std::string path = OutPath(sc, stem, as_json ? "json" : "csv");
  WriteTextFile(path, as_json ? json.dump(2) + "\n" : csv);
  std::cout << "wrote " << path << "\n";
}

SensorSubset ParseSubset(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--subset: '" + item + "' is not a sensor index");
    }
  }
  return SensorSubset(std::move(out));
}

int CmdSimulate(const CommonFlags& f) {
  const Scenario sc = Load(f);
  const SystemModel model = BuildModel(sc);
  const AttackSpec attack = BuildAttack(sc, model.p(), sc.k, RepetitionSeed(sc.seed, 0));
  const Vector x0 = sc.x0 ? *sc.x0 : Vector::Zero(model.n());
  const Trajectory traj = Simulate(model, attack, ScenarioHorizon(sc, model.n()), x0, sc.seed);
  Json j = TrajectoryJson(traj);
  j["attack"] = ToJson(attack);
  Emit(sc, "trajectory", j, TrajectoryCsv(traj));
  return 0;
}

int CmdDetect(const CommonFlags& f, const std::string& subset_text) {
  const Scenario sc = Load(f);
  const SystemModel model = BuildModel(sc);
  const SensorSubset s = subset_text.empty() ? SensorSubset::Full(model.p()) : ParseSubset(subset_text);
  DetectorConfig cfg = sc.detector;
  cfg.k = sc.k;
  const AttackSpec attack = BuildAttack(sc, model.p(), sc.k, RepetitionSeed(sc.seed, 0));
  const Vector x0 = sc.x0 ? *sc.x0 : Vector::Zero(model.n());
  const Trajectory traj = Simulate(model, attack, ScenarioHorizon(sc, model.n()), x0, sc.seed);
  const Detection d = AttackDetect(model, traj, s, cfg);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["flag"] = d.flag;
  j["attack"] = ToJson(attack);
  j["report"] = ToJson(d.report, true);
  std::ostringstream csv;
  csv << "schema_version,subset,mode,t1,window,max_deviation,eta,passed,flag\n"
      << kSchemaVersion << ',' << CsvCell(d.report.subset.ToString()) << ',' << ToString(d.report.mode) << ','
      << d.report.t1 << ',' << d.report.window << ',' << FormatDouble(d.report.max_deviation) << ','
      << FormatDouble(d.report.eta) << ',' << (d.report.passed ? 1 : 0) << ',' << d.flag << '\n';
  Emit(sc, "detect", j, csv.str());
  std::cout << "flag " << d.flag << " max_deviation " << d.report.max_deviation << " eta " << d.report.eta << "\n";
  return 0;
}

int CmdSearch(const CommonFlags& f) {
  const Scenario sc = Load(f);
  const Json j = RunScenario(sc, f.timing);
  std::ostringstream csv;
  csv << "schema_version,method,found,subset,theory_checks,hypotheses,certificates";
  if (f.timing) csv << ",wall_time";
  csv << '\n';
  for (const auto& o : j["outcomes"]) {
    std::string subset;
    if (o["found"].get<bool>()) {
      for (const auto& i : o["subset"]) subset += (subset.empty() ? "" : " ") + std::to_string(i.get<int>());
    }
    csv << kSchemaVersion << ',' << o["method"].get<std::string>() << ',' << (o["found"].get<bool>() ? 1 : 0)
        << ',' << subset << ',' << o["theory_checks"].get<long>() << ',' << o["hypotheses"].get<long>() << ','
        << o["certificates"].size();
    if (f.timing) csv << ',' << FormatDouble(o["wall_time"].get<double>());
    csv << '\n';
    std::cout << o["method"].get<std::string>() << ": found " << o["found"].get<bool>() << " subset {" << subset
              << "} checks " << o["theory_checks"].get<long>() << "\n";
    for (const auto& w : o["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  }
  Emit(sc, "search", j, csv.str());
  return 0;
}

int CmdExp1(const CommonFlags& f) {
  const Scenario sc = Load(f);
  const Exp1Result r = RunExperiment1(sc);
  Emit(sc, "exp1", Exp1Json(r), Exp1Csv(r));
  std::cout << "unique attack-free subset in " << r.unique_attack_free_rate * 100.0 << "% of "
            << r.runs.size() << " runs\n";
  return 0;
}

int CmdExp2(const CommonFlags& f) {
  const Scenario sc = Load(f);
  const Exp2Result r = RunExperiment2(sc);
  Emit(sc, "exp2", Exp2Json(r, false), Exp2Csv(r));
  if (sc.format == "csv") {
    const std::string trials = OutPath(sc, "exp2_trials", "csv");
    WriteTextFile(trials, Exp2TrialsCsv(r));
    std::cout << "wrote " << trials << "\n";
  }
  // Timings vary between runs, so they live in their own file.
  const std::string timing = OutPath(sc, "exp2_timing", "csv");
  WriteTextFile(timing, Exp2TimingCsv(r));
  std::cout << "wrote " << timing << "\n";
  for (const auto& row : r.rows) {
    std::printf("p=%2d k=%d  exhaustive %.3es (%.1f checks)  smt %.3es (%.1f checks)\n", row.p, row.k,
                row.mean_time_exhaustive, row.mean_checks_exhaustive, row.mean_time_smt, row.mean_checks_smt);
  }
  return 0;
}

SymbolObservation CorruptedSymbols(const SystemModel& model, const NoiselessScenario& ns) {
  SymbolObservation obs = Encode(model, ns.x0);
  const auto blocks = SensorBlocks(model);
  for (const auto& c : ns.corruptions) {
    if (c.sensor < 1 || c.sensor > model.p()) throw RangeError("corrupted sensor outside 1..p");
    if (c.x.size() != model.n()) throw DimensionError("corruption state must have n entries");
    obs.symbols[static_cast<size_t>(c.sensor - 1)] = blocks[static_cast<size_t>(c.sensor - 1)] * c.x;
  }
  return obs;
}

int CmdDecode(const CommonFlags& f, std::optional<int> k_flag) {
  const Scenario sc = Load(f);
  if (!sc.noiseless) throw ConfigError("scenario has no noiseless section");
  SystemModel model = BuildModel(sc);
  const int k = k_flag.value_or(sc.k);
  const SymbolObservation obs = CorruptedSymbols(model, *sc.noiseless);
  const bool corrupted = DetectCorruption(model, obs);
  const DecodeResult result = Decode(model, obs, k);

  Json j;
  j["schema_version"] = kSchemaVersion;
  j["k"] = k;
  j["corruption_detected"] = corrupted;
  j["min_symbol_distance"] = MinSymbolDistance(model);
  j["decode"] = ToJson(result);
  std::ostringstream csv;
  csv << "schema_version,k,corruption_detected,unique,explanations,corrupted";
  for (int i = 1; i <= model.n(); ++i) csv << ",x" << i;
  csv << '\n' << kSchemaVersion << ',' << k << ',' << (corrupted ? 1 : 0) << ',' << (result.unique ? 1 : 0)
      << ',' << result.explanations.size() << ',';
  for (size_t i = 0; i < result.corrupted.size(); ++i) csv << (i ? " " : "") << result.corrupted[i];
  for (Eigen::Index i = 0; i < result.state.size(); ++i) csv << ',' << FormatDouble(result.state(i));
  csv << '\n';
  Emit(sc, "decode", j, csv.str());
  std::cout << "unique " << result.unique << ", " << result.explanations.size() << " explanation(s)\n";
  return 0;
}

int CmdObsv(const CommonFlags& f) {
  const Scenario sc = Load(f);
  const SystemModel model = BuildModel(sc);
  const SensorSubset full = SensorSubset::Full(model.p());
  const bool observable = IsObservable(model, full);
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = model.n();
  j["p"] = model.p();
  j["rank_full"] = NumericalRank(ObservabilityMatrix(model, full).stacked);
  j["observable"] = observable;
  const int theta = SparseObservabilityIndex(model);
  j["sparse_observability_index"] = theta;
  j["min_symbol_distance"] = observable ? Json(theta + 1) : Json(nullptr);
  const auto blocks = SensorBlocks(model);
  Json ranks = Json::array();
  for (const auto& b : blocks) ranks.push_back(NumericalRank(b));
  j["sensor_ranks"] = std::move(ranks);
  std::ostringstream csv;
  csv << "schema_version,n,p,rank_full,observable,sparse_observability_index\n"
      << kSchemaVersion << ',' << model.n() << ',' << model.p() << ',' << j["rank_full"].get<int>() << ','
      << (observable ? 1 : 0) << ',' << theta << '\n';
  Emit(sc, "obsv", j, csv.str());
  std::cout << "theta = " << theta << "\n";
  return 0;
}

int CmdRiccati(const CommonFlags& f, const std::string& subset_text) {
  const Scenario sc = Load(f);
  const SystemModel model = BuildModel(sc);
  const SensorSubset s = subset_text.empty() ? SensorSubset::Full(model.p()) : ParseSubset(subset_text);
  s.CheckAgainst(model.p());
  if (!IsObservable(model, s)) throw AnalysisError("subset " + s.ToString() + " is not observable");
  const SteadyStateFilter filter = SolveSteadyState(model, s, sc.detector.mode, sc.detector.riccati);
  Json j = ToJson(filter);
  j["schema_version"] = kSchemaVersion;
  std::ostringstream csv;
  csv << "schema_version,subset,mode,iterations,riccati_residual,trace_P_star,trace_F_star\n"
      << kSchemaVersion << ',' << CsvCell(s.ToString()) << ',' << ToString(filter.mode) << ',' << filter.iterations
      << ',' << FormatDouble(filter.riccati_residual) << ',' << FormatDouble(filter.P_star.trace()) << ','
      << (filter.mode == FilterMode::kFiltering ? FormatDouble(filter.F_star.trace()) : "") << '\n';
  Emit(sc, "riccati", j, csv.str());
  return 0;
}

int CmdSat(const std::string& formula_path, const CommonFlags& f) {
  const PBFormula formula = PBFormula::FromText(ReadTextFile(formula_path));
  const auto b = Solve(formula);
  Scenario sc;
  sc.output_dir = f.out.value_or(".");
  sc.format = f.format.value_or("json");
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["status"] = b ? "SAT" : "UNSAT";
  std::string bits;
  if (b) {
    Json arr = Json::array();
    for (bool v : *b) {
      arr.push_back(v ? 1 : 0);
      bits += v ? '1' : '0';
    }
    j["assignment"] = std::move(arr);
  }
  std::ostringstream csv;
  csv << "schema_version,status,assignment\n" << kSchemaVersion << ',' << (b ? "SAT" : "UNSAT") << ',' << bits << '\n';
  Emit(sc, "sat", j, csv.str());
  std::cout << (b ? "SAT " + bits : std::string("UNSAT")) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure state estimation under sparse sensor attacks"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string subset;
  std::string formula;
  std::optional<int> decode_k;

  auto* simulate = app.add_subcommand("simulate", "simulate the scenario's plant and attack");
  AddCommon(simulate, flags);
  auto* detect = app.add_subcommand("detect", "residue test on one sensor subset");
  AddCommon(detect, flags);
  detect->add_option("--subset", subset, "comma-separated sensors (default: all)");
  auto* search = app.add_subcommand("search", "exhaustive and/or SMT subset search");
  AddCommon(search, flags);
  search->add_flag("--timing", flags.timing, "include wall times in the output");
  auto* exp1 = app.add_subcommand("exp1", "residue test on every (p-k)-subset, per repetition");
  AddCommon(exp1, flags);
  auto* exp2 = app.add_subcommand("exp2", "exhaustive vs SMT search over a sweep of p");
  AddCommon(exp2, flags);
  auto* decode = app.add_subcommand("decode-noiseless", "noiseless symbol decoding");
  AddCommon(decode, flags);
  decode->add_option("--k", decode_k, "corruption budget (default: scenario k)");
  auto* obsv = app.add_subcommand("obsv", "observability and sparse observability index");
  AddCommon(obsv, flags);
  auto* riccati = app.add_subcommand("riccati", "steady-state Kalman filter for a subset");
  AddCommon(riccati, flags);
  riccati->add_option("--subset", subset, "comma-separated sensors (default: all)");
  auto* sat = app.add_subcommand("sat", "solve a cardinality formula file");
  AddCommon(sat, flags, false);
  sat->add_option("formula", formula, "formula text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) return CmdSimulate(flags);
    if (*detect) return CmdDetect(flags, subset);
    if (*search) return CmdSearch(flags);
    if (*exp1) return CmdExp1(flags);
    if (*exp2) return CmdExp2(flags);
    if (*decode) return CmdDecode(flags, decode_k);
    if (*obsv) return CmdObsv(flags);
    if (*riccati) return CmdRiccati(flags, subset);
    if (*sat) return CmdSat(formula, flags);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    // Analysis, dimension and range failures.
    std::cerr << "analysis error: " << e.what() << "\n";
    return kExitAnalysis;
  }
  return kExitUsage;
}
