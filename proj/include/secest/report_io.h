#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "secest/common.h"
#include "secest/detect.h"
#include "secest/kalman.h"
#include "secest/model.h"
#include "secest/noiseless.h"
#include "secest/pbsat.h"
#include "secest/search.h"

namespace secest {

using Json = nlohmann::ordered_json;

/// Bumped whenever a CSV column or JSON field changes meaning.
inline constexpr int kSchemaVersion = 1;

/// Row-major nested arrays.
Json MatrixToJson(const Matrix& m);
Json VectorToJson(const Vector& v);
/// `where` names the field in error messages.
Matrix MatrixFromJson(const Json& j, const std::string& where);
Vector VectorFromJson(const Json& j, const std::string& where);

Json ToJson(const SensorSubset& s);
Json ToJson(const SystemModel& model);
Json ToJson(const AttackSpec& attack);
Json ToJson(const SteadyStateFilter& filter);
Json ToJson(const ResidueReport& report, bool include_matrices);
Json ToJson(const PBConstraint& c);
/// Per-iteration trace included. Wall time only when `timing` is set, so
/// that default output is reproducible.
Json ToJson(const SearchOutcome& outcome, bool timing);
Json ToJson(const DecodeResult& result);

/// One row per time step: t, x_1..x_n, y_1..y_p, a_1..a_p.
std::string TrajectoryCsv(const Trajectory& traj);
Json TrajectoryJson(const Trajectory& traj);

/// Fixed-format double for CSV cells (shortest round-trip representation).
std::string FormatDouble(double value);

/// Quotes a CSV cell when needed.
std::string CsvCell(const std::string& text);

/// Writes text; a missing parent directory is an IoError, not created.
void WriteTextFile(const std::string& path, const std::string& content);
std::string ReadTextFile(const std::string& path);

}  // namespace secest
