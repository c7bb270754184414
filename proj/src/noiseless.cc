#include "secest/noiseless.h"

#include "secest/obsv.h"

namespace secest {
namespace {

double ConsistencyTolerance(const Vector& y) { return 1e-8 * (1.0 + y.norm()); }

struct LeastSquares {
  Vector x;
  double residual = 0.0;
};

LeastSquares Fit(const Matrix& O, const Vector& y) {
  LeastSquares out;
  out.x = O.completeOrthogonalDecomposition().solve(y);
  out.residual = (O * out.x - y).norm();
  return out;
}

bool SameState(const Vector& a, const Vector& b) {
  return (a - b).norm() <= 1e-6 * (1.0 + std::max(a.norm(), b.norm()));
}

void RequireObservable(const SystemModel& model) {
  if (!IsObservable(model, SensorSubset::Full(model.p()))) {
    throw AnalysisError("full sensor set is not observable");
  }
}

void CheckObservation(const SystemModel& model, const SymbolObservation& obs) {
  if (obs.p() != model.p()) {
    throw DimensionError("observation has " + std::to_string(obs.p()) + " symbols, model has p = " +
                         std::to_string(model.p()));
  }
  for (const Vector& y : obs.symbols) {
    if (y.size() != model.n()) throw DimensionError("symbol length differs from n");
  }
}

}  // namespace

Vector SymbolObservation::Stack(const SensorSubset& s) const {
  const auto n = symbols.empty() ? 0 : symbols.front().size();
  Vector out(n * s.size());
  for (int r = 0; r < s.size(); ++r) out.segment(r * n, n) = symbols[static_cast<size_t>(s[r] - 1)];
  return out;
}

SymbolObservation Encode(const SystemModel& model, const Vector& x0) {
  model.Validate();
  if (x0.size() != model.n()) throw DimensionError("x0 length differs from n");
  SymbolObservation obs;
  for (const Matrix& block : SensorBlocks(model)) obs.symbols.push_back(block * x0);
  return obs;
}

bool SubsetConsistent(const SystemModel& model, const SymbolObservation& obs,
                      const SensorSubset& s) {
  CheckObservation(model, obs);
  const Vector y = obs.Stack(s);
  return Fit(ObservabilityMatrix(model, s).stacked, y).residual <= ConsistencyTolerance(y);
}

bool DetectCorruption(const SystemModel& model, const SymbolObservation& obs) {
  model.Validate();
  RequireObservable(model);
  return !SubsetConsistent(model, obs, SensorSubset::Full(model.p()));
}

DecodeResult Decode(const SystemModel& model, const SymbolObservation& obs, int k,
                    const DecodeOptions& options) {
  model.Validate();
  CheckObservation(model, obs);
  if (k < 0 || k >= model.p()) throw ConfigError("decode needs 0 <= k < p");
  const auto blocks = SensorBlocks(model);

  DecodeResult result;
  ForEachSubset(model.p(), model.p() - k, [&](const SensorSubset& s) {
    const Matrix O = StackBlocks(blocks, s);
    if (NumericalRank(O) < model.n()) return true;
    const Vector y = obs.Stack(s);
    LeastSquares fit = Fit(O, y);
    if (fit.residual > ConsistencyTolerance(y)) return true;
    for (const auto& e : result.explanations) {
      if (SameState(e.state, fit.x)) return true;
    }
    SensorSubset corrupted = s.Complement(model.p());
    result.explanations.push_back({fit.x, s, corrupted.indices()});
    return options.complete_enumeration;
  });
  if (result.explanations.empty()) {
    throw DecodeError("no observable " + std::to_string(model.p() - k) +
                      "-subset is consistent with the symbols");
  }
  result.state = result.explanations.front().state;
  result.corrupted = result.explanations.front().corrupted;
  result.unique = result.explanations.size() == 1;
  return result;
}

int MinSymbolDistance(const SystemModel& model) {
  model.Validate();
  RequireObservable(model);
  return SparseObservabilityIndex(model) + 1;
}

int SymbolDistance(const SymbolObservation& a, const SymbolObservation& b) {
  if (a.p() != b.p()) throw DimensionError("observations differ in sensor count");
  int count = 0;
  for (int d = 0; d < a.p(); ++d) {
    const Vector& ya = a.symbols[static_cast<size_t>(d)];
    const Vector& yb = b.symbols[static_cast<size_t>(d)];
    if ((ya - yb).norm() > 1e-8 * (1.0 + std::max(ya.norm(), yb.norm()))) ++count;
  }
  return count;
}

}  // namespace secest
