#include "secest/report_io.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace secest {

Json MatrixToJson(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json VectorToJson(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix MatrixFromJson(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a nonempty array of rows");
  const size_t cols = j.front().is_array() ? j.front().size() : 0;
  if (cols == 0) throw ParseError(where + ": rows must be nonempty arrays");
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (size_t r = 0; r < j.size(); ++r) {
    const Json& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw ParseError(where + ": row " + std::to_string(r) + " has the wrong length");
    }
    for (size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw ParseError(where + "[" + std::to_string(r) + "][" + std::to_string(c) +
                         "]: expected a number");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

Vector VectorFromJson(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError(where + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json ToJson(const SensorSubset& s) { return Json(s.indices()); }

Json ToJson(const SystemModel& model) {
  Json j;
  j["n"] = model.n();
  j["p"] = model.p();
  j["A"] = MatrixToJson(model.A);
  j["C"] = MatrixToJson(model.C);
  if (model.B) j["B"] = MatrixToJson(*model.B);
  j["sigma_w2"] = model.sigma_w2;
  j["sigma_v2"] = model.sigma_v2;
  return j;
}

Json ToJson(const AttackSpec& attack) {
  Json j;
  j["strategy"] = ToString(attack.kind);
  j["sensors"] = attack.attacked;
  switch (attack.kind) {
    case AttackKind::kNoiseLinear: j["gain"] = attack.gain; break;
    case AttackKind::kConstant: j["bias"] = attack.bias; break;
    case AttackKind::kSeededRandom: j["amplitude"] = attack.amplitude; break;
    default: break;
  }
  return j;
}

Json ToJson(const SteadyStateFilter& filter) {
  Json j;
  j["subset"] = ToJson(filter.subset);
  j["mode"] = ToString(filter.mode);
  j["iterations"] = filter.iterations;
  j["riccati_residual"] = filter.riccati_residual;
  j["trace_P_star"] = filter.P_star.trace();
  if (filter.mode == FilterMode::kFiltering) j["trace_F_star"] = filter.F_star.trace();
  j["gain"] = MatrixToJson(filter.gain);
  j["P_star"] = MatrixToJson(filter.P_star);
  if (filter.mode == FilterMode::kFiltering) j["F_star"] = MatrixToJson(filter.F_star);
  return j;
}

Json ToJson(const ResidueReport& report, bool include_matrices) {
  Json j;
  j["subset"] = ToJson(report.subset);
  j["mode"] = ToString(report.mode);
  j["t1"] = report.t1;
  j["window"] = report.window;
  j["max_deviation"] = report.max_deviation;
  j["eta"] = report.eta;
  j["passed"] = report.passed;
  j["per_sensor_mu"] = report.per_sensor_mu;
  j["per_sensor_mu_normalized"] = report.per_sensor_mu_normalized;
  if (include_matrices) {
    j["sample_matrix"] = MatrixToJson(report.sample_matrix);
    j["expected_matrix"] = MatrixToJson(report.expected_matrix);
  }
  return j;
}

Json ToJson(const PBConstraint& c) {
  Json j;
  // Sensors are reported 1-based like every other subset.
  std::vector<int> sensors;
  for (int v : c.vars) sensors.push_back(v + 1);
  j["sensors"] = sensors;
  j["sense"] = c.sense == Sense::kAtMost ? "<=" : ">=";
  j["bound"] = c.bound;
  return j;
}

Json ToJson(const SearchOutcome& outcome, bool timing) {
  Json j;
  j["method"] = outcome.method;
  j["found"] = outcome.found;
  j["subset"] = outcome.found ? ToJson(outcome.subset) : Json(nullptr);
  j["theory_checks"] = outcome.theory_checks;
  j["hypotheses"] = outcome.hypotheses;
  if (timing) j["wall_time"] = outcome.wall_time;
  Json certs = Json::array();
  for (const auto& c : outcome.certificates) certs.push_back(ToJson(c));
  j["certificates"] = std::move(certs);
  Json steps = Json::array();
  for (const auto& step : outcome.steps) {
    Json s;
    s["subset"] = ToJson(step.subset);
    s["flag"] = step.flag;
    if (step.untestable) s["untestable"] = true;
    s["max_deviation"] = std::isfinite(step.max_deviation) ? Json(step.max_deviation) : Json(nullptr);
    s["eta"] = step.eta;
    Json probes = Json::array();
    for (const auto& probe : step.probes) {
      probes.push_back({{"subset", ToJson(probe.subset)}, {"flag", probe.flag}});
    }
    s["probes"] = std::move(probes);
    Json step_certs = Json::array();
    for (const auto& c : step.certificates) step_certs.push_back(ToJson(c));
    s["certificates"] = std::move(step_certs);
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  if (outcome.report) j["report"] = ToJson(*outcome.report, false);
  j["warnings"] = outcome.warnings;
  return j;
}

Json ToJson(const DecodeResult& result) {
  Json j;
  j["state"] = VectorToJson(result.state);
  j["corrupted"] = result.corrupted;
  j["unique"] = result.unique;
  Json alts = Json::array();
  for (const auto& e : result.explanations) {
    alts.push_back({{"state", VectorToJson(e.state)},
                    {"consistent_subset", ToJson(e.consistent_subset)},
                    {"corrupted", e.corrupted}});
  }
  j["explanations"] = std::move(alts);
  return j;
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string CsvCell(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string TrajectoryCsv(const Trajectory& traj) {
  std::ostringstream out;
  out << "schema_version,t";
  for (int i = 1; i <= traj.n(); ++i) out << ",x" << i;
  for (int i = 1; i <= traj.p(); ++i) out << ",y" << i;
  for (int i = 1; i <= traj.p(); ++i) out << ",a" << i;
  out << '\n';
  for (int t = 0; t < traj.horizon; ++t) {
    out << kSchemaVersion << ',' << t;
    for (int i = 0; i < traj.n(); ++i) out << ',' << FormatDouble(traj.states(i, t));
    for (int i = 0; i < traj.p(); ++i) out << ',' << FormatDouble(traj.outputs(i, t));
    for (int i = 0; i < traj.p(); ++i) out << ',' << FormatDouble(traj.attack(i, t));
    out << '\n';
  }
  return out.str();
}

Json TrajectoryJson(const Trajectory& traj) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["horizon"] = traj.horizon;
  j["seed"] = traj.seed;
  // Time-major: one entry per step.
  j["states"] = MatrixToJson(traj.states.transpose());
  j["outputs"] = MatrixToJson(traj.outputs.transpose());
  j["attack"] = MatrixToJson(traj.attack.transpose());
  return j;
}

void WriteTextFile(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path parent = target.parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw IoError("output directory '" + parent.string() + "' does not exist");
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace secest
