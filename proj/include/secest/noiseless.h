#pragma once

#include <vector>

#include "secest/common.h"
#include "secest/model.h"

namespace secest {

/// Noiseless outputs of each sensor over t = 0..n-1, one n-vector ("symbol")
/// per sensor.
struct SymbolObservation {
  std::vector<Vector> symbols;

  int p() const { return static_cast<int>(symbols.size()); }
  /// Stacked symbols of the subset, ascending.
  Vector Stack(const SensorSubset& s) const;
};

class DecodeError : public AnalysisError {
 public:
  using AnalysisError::AnalysisError;
};

/// A state explaining every symbol of `consistent_subset`.
struct Explanation {
  Vector state;
  SensorSubset consistent_subset;
  std::vector<int> corrupted;  // complement, may be empty
};

struct DecodeResult {
  Vector state;
  std::vector<int> corrupted;
  bool unique = true;
  /// One entry per distinct state among the consistent (p-k)-subsets, keyed by
  /// the first subset producing it.
  std::vector<Explanation> explanations;
};

struct DecodeOptions {
  /// Keep enumerating after the first hit so ambiguity is reported.
  bool complete_enumeration = true;
};

SymbolObservation Encode(const SystemModel& model, const Vector& x0);

/// Least-squares residual of Y_s against range(O_s) is within 1e-8 (1 + ||Y_s||).
bool SubsetConsistent(const SystemModel& model, const SymbolObservation& obs,
                      const SensorSubset& s);

/// True iff no single state explains all symbols.
bool DetectCorruption(const SystemModel& model, const SymbolObservation& obs);

/// Recovers x(0) assuming at most k corrupted symbols.
DecodeResult Decode(const SystemModel& model, const SymbolObservation& obs, int k,
                    const DecodeOptions& options = {});

/// theta + 1.
int MinSymbolDistance(const SystemModel& model);

/// Number of sensors whose symbols differ (beyond tolerance) between two
/// observations.
int SymbolDistance(const SymbolObservation& a, const SymbolObservation& b);

}  // namespace secest
