#pragma once

#include <optional>
#include <string>
#include <vector>

#include "secest/common.h"

namespace secest {

enum class Sense { kAtMost, kAtLeast };

/// sum_{i in vars} b_i <= bound (AtMost) or >= bound (AtLeast). Variables are
/// 0-based.
struct PBConstraint {
  std::vector<int> vars;
  Sense sense = Sense::kAtMost;
  int bound = 0;

  static PBConstraint AtMost(std::vector<int> vars, int bound);
  static PBConstraint AtLeast(std::vector<int> vars, int bound);
  /// sum_{i in s} b_{i-1} >= 1: not every sensor of s is attack-free.
  static PBConstraint Certificate(const SensorSubset& s);

  bool SatisfiedBy(const std::vector<bool>& values) const;

  friend bool operator==(const PBConstraint& a, const PBConstraint& b) {
    return a.vars == b.vars && a.sense == b.sense && a.bound == b.bound;
  }
};

/// Conjunction of cardinality constraints over num_vars Boolean variables.
class PBFormula {
 public:
  explicit PBFormula(int num_vars = 0) : num_vars_(num_vars) {}

  int num_vars() const { return num_vars_; }
  const std::vector<PBConstraint>& constraints() const { return constraints_; }

  /// Returns a copy with c appended.
  [[nodiscard]] PBFormula WithConstraint(PBConstraint c) const;
  /// Appends in place.
  void Add(PBConstraint c);

  bool SatisfiedBy(const std::vector<bool>& values) const;

  /// One line per constraint: "<= k : i1 i2 ..." or ">= k : ...", 0-based
  /// indices, preceded by a "p <num_vars>" header.
  std::string ToText() const;
  static PBFormula FromText(const std::string& text);

 private:
  void Check(const PBConstraint& c) const;

  int num_vars_;
  std::vector<PBConstraint> constraints_;
};

using Assignment = std::vector<bool>;

/// Satisfying assignment with the fewest true variables; among those, the one
/// whose true-index set is lexicographically smallest. nullopt when UNSAT.
/// Depth-first search with cardinality propagation.
std::optional<Assignment> Solve(const PBFormula& formula);

}  // namespace secest
