#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace secest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error hierarchy. The CLI maps each family onto its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Numerical analysis failures: unobservable pairs, Riccati divergence,
/// degenerate thresholds, decoding failures.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public AnalysisError {
 public:
  ConvergenceError(const std::string& what, double last_change, long iterations)
      : AnalysisError(what), last_change_(last_change), iterations_(iterations) {}
  double last_change() const { return last_change_; }
  long iterations() const { return iterations_; }

 private:
  double last_change_;
  long iterations_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class FilterMode { kPrediction, kFiltering };

const char* ToString(FilterMode mode);
FilterMode FilterModeFromString(const std::string& text);

/// A nonempty, strictly ascending set of 1-based sensor indices.
class SensorSubset {
 public:
  SensorSubset() = default;
  SensorSubset(std::initializer_list<int> indices);
  explicit SensorSubset(std::vector<int> indices);

  /// {1, ..., p}
  static SensorSubset Full(int p);

  const std::vector<int>& indices() const { return indices_; }
  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  bool contains(int sensor) const;
  int operator[](int pos) const { return indices_[static_cast<size_t>(pos)]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  /// Throws RangeError unless every index lies in {1..p}.
  void CheckAgainst(int p) const;

  SensorSubset Without(int sensor) const;
  /// {1..p} minus this set.
  SensorSubset Complement(int p) const;
  /// Bitmask with bit (i-1) set for each member.
  std::uint64_t Mask() const;

  std::string ToString() const;

  friend bool operator==(const SensorSubset& a, const SensorSubset& b) {
    return a.indices_ == b.indices_;
  }
  friend bool operator<(const SensorSubset& a, const SensorSubset& b) {
    return a.indices_ < b.indices_;
  }

 private:
  std::vector<int> indices_;
};

/// Visits every r-subset of {1..p} in lexicographic order. The visitor
/// returns false to stop early. Returns the number of subsets visited.
long ForEachSubset(int p, int r, const std::function<bool(const SensorSubset&)>& visit);

/// All r-subsets of {1..p}, lexicographic.
std::vector<SensorSubset> AllSubsets(int p, int r);

long BinomialCoefficient(int n, int r);

/// Thread cap from SECEST_THREADS, defaulting to hardware concurrency.
int ThreadBudget();

}  // namespace secest
