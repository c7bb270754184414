#include "secest/common.h"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <thread>

namespace secest {

const char* ToString(FilterMode mode) {
  return mode == FilterMode::kPrediction ? "prediction" : "filtering";
}

FilterMode FilterModeFromString(const std::string& text) {
  if (text == "prediction") return FilterMode::kPrediction;
  if (text == "filtering") return FilterMode::kFiltering;
  throw ConfigError("unknown filter mode '" + text + "'");
}

SensorSubset::SensorSubset(std::initializer_list<int> indices)
    : SensorSubset(std::vector<int>(indices)) {}

SensorSubset::SensorSubset(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw ConfigError("sensor subset contains duplicate indices");
  }
  if (!indices_.empty() && indices_.front() < 1) {
    throw RangeError("sensor indices are 1-based");
  }
}

SensorSubset SensorSubset::Full(int p) {
  std::vector<int> all(static_cast<size_t>(std::max(p, 0)));
  for (int i = 0; i < p; ++i) all[static_cast<size_t>(i)] = i + 1;
  return SensorSubset(std::move(all));
}

bool SensorSubset::contains(int sensor) const {
  return std::binary_search(indices_.begin(), indices_.end(), sensor);
}

void SensorSubset::CheckAgainst(int p) const {
  if (indices_.empty()) throw RangeError("sensor subset is empty");
  if (indices_.back() > p) {
    throw RangeError("sensor index " + std::to_string(indices_.back()) +
                     " exceeds sensor count " + std::to_string(p));
  }
}

SensorSubset SensorSubset::Without(int sensor) const {
  std::vector<int> rest;
  rest.reserve(indices_.size());
  for (int i : indices_) {
    if (i != sensor) rest.push_back(i);
  }
  return SensorSubset(std::move(rest));
}

SensorSubset SensorSubset::Complement(int p) const {
  std::vector<int> rest;
  for (int i = 1; i <= p; ++i) {
    if (!contains(i)) rest.push_back(i);
  }
  return SensorSubset(std::move(rest));
}

std::uint64_t SensorSubset::Mask() const {
  std::uint64_t mask = 0;
  for (int i : indices_) mask |= std::uint64_t{1} << (i - 1);
  return mask;
}

std::string SensorSubset::ToString() const {
  std::ostringstream out;
  out << '{';
  for (size_t i = 0; i < indices_.size(); ++i) {
    if (i) out << ',';
    out << indices_[i];
  }
  out << '}';
  return out.str();
}

long ForEachSubset(int p, int r, const std::function<bool(const SensorSubset&)>& visit) {
  if (r < 0 || r > p) return 0;
  std::vector<int> idx(static_cast<size_t>(r));
  for (int i = 0; i < r; ++i) idx[static_cast<size_t>(i)] = i + 1;
  long visited = 0;
  while (true) {
    ++visited;
    if (!visit(SensorSubset(idx))) return visited;
    int pos = r - 1;
    while (pos >= 0 && idx[static_cast<size_t>(pos)] == p - r + pos + 1) --pos;
    if (pos < 0) return visited;
    ++idx[static_cast<size_t>(pos)];
    for (int j = pos + 1; j < r; ++j) {
      idx[static_cast<size_t>(j)] = idx[static_cast<size_t>(j - 1)] + 1;
    }
  }
}

std::vector<SensorSubset> AllSubsets(int p, int r) {
  std::vector<SensorSubset> out;
  ForEachSubset(p, r, [&](const SensorSubset& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

long BinomialCoefficient(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  long result = 1;
  for (int i = 1; i <= r; ++i) result = result * (n - r + i) / i;
  return result;
}

int ThreadBudget() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("SECEST_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) return std::min(cap, hw);
  }
  return hw;
}

}  // namespace secest
