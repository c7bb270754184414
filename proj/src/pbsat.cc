#include "secest/pbsat.h"

#include <algorithm>
#include <sstream>

namespace secest {

PBConstraint PBConstraint::AtMost(std::vector<int> vars, int bound) {
  std::sort(vars.begin(), vars.end());
  return {std::move(vars), Sense::kAtMost, bound};
}

PBConstraint PBConstraint::AtLeast(std::vector<int> vars, int bound) {
  std::sort(vars.begin(), vars.end());
  return {std::move(vars), Sense::kAtLeast, bound};
}

PBConstraint PBConstraint::Certificate(const SensorSubset& s) {
  std::vector<int> vars;
  for (int i : s) vars.push_back(i - 1);
  return AtLeast(std::move(vars), 1);
}

bool PBConstraint::SatisfiedBy(const std::vector<bool>& values) const {
  int sum = 0;
  for (int v : vars) sum += values[static_cast<size_t>(v)] ? 1 : 0;
  return sense == Sense::kAtMost ? sum <= bound : sum >= bound;
}

void PBFormula::Check(const PBConstraint& c) const {
  if (c.vars.empty()) throw ConfigError("constraint has no variables");
  if (c.bound < 0) throw ConfigError("constraint bound must be nonnegative");
  std::vector<int> sorted = c.vars;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("constraint repeats a variable");
  }
  if (sorted.front() < 0 || sorted.back() >= num_vars_) {
    throw RangeError("constraint variable outside 0.." + std::to_string(num_vars_ - 1));
  }
}

PBFormula PBFormula::WithConstraint(PBConstraint c) const {
  PBFormula out = *this;
  out.Add(std::move(c));
  return out;
}

void PBFormula::Add(PBConstraint c) {
  Check(c);
  constraints_.push_back(std::move(c));
}

bool PBFormula::SatisfiedBy(const std::vector<bool>& values) const {
  return std::all_of(constraints_.begin(), constraints_.end(),
                     [&](const PBConstraint& c) { return c.SatisfiedBy(values); });
}

std::string PBFormula::ToText() const {
  std::ostringstream out;
  out << "p " << num_vars_ << '\n';
  for (const auto& c : constraints_) {
    out << (c.sense == Sense::kAtMost ? "<= " : ">= ") << c.bound << " :";
    for (int v : c.vars) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

PBFormula PBFormula::FromText(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::optional<PBFormula> formula;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head == "p") {
      int vars = -1;
      if (!(fields >> vars) || vars < 0) {
        throw ParseError("line " + std::to_string(line_no) + ": bad variable count");
      }
      formula.emplace(vars);
      continue;
    }
    if (!formula) throw ParseError("line " + std::to_string(line_no) + ": missing 'p' header");
    if (head != "<=" && head != ">=") {
      throw ParseError("line " + std::to_string(line_no) + ": expected '<=' or '>='");
    }
    int bound = 0;
    std::string colon;
    if (!(fields >> bound >> colon) || colon != ":") {
      throw ParseError("line " + std::to_string(line_no) + ": expected '<bound> :'");
    }
    std::vector<int> vars;
    int v;
    while (fields >> v) vars.push_back(v);
    formula->Add(head == "<=" ? PBConstraint::AtMost(vars, bound)
                              : PBConstraint::AtLeast(vars, bound));
  }
  if (!formula) throw ParseError("empty formula text");
  return *formula;
}

namespace {

// DFS over variables in index order with counter-based propagation. The
// outer loop fixes the number of true variables, and the true branch is
// tried first, so the first model found has the fewest trues and the
// lexicographically smallest true set.
class CardinalitySearch {
 public:
  CardinalitySearch(const PBFormula& formula, int true_count)
      : p_(formula.num_vars()),
        constraints_(formula.constraints()),
        value_(static_cast<size_t>(p_), kUnassigned),
        watches_(static_cast<size_t>(p_)) {
    std::vector<int> all(static_cast<size_t>(p_));
    for (int i = 0; i < p_; ++i) all[static_cast<size_t>(i)] = i;
    constraints_.push_back(PBConstraint::AtMost(all, true_count));
    constraints_.push_back(PBConstraint::AtLeast(all, true_count));
    trues_.assign(constraints_.size(), 0);
    free_.resize(constraints_.size());
    for (size_t c = 0; c < constraints_.size(); ++c) {
      free_[c] = static_cast<int>(constraints_[c].vars.size());
      for (int v : constraints_[c].vars) watches_[static_cast<size_t>(v)].push_back(c);
    }
  }

  std::optional<Assignment> Run() {
    // Root-level propagation over every constraint.
    for (size_t c = 0; c < constraints_.size(); ++c) {
      if (!Propagate(c)) return std::nullopt;
    }
    if (!Search(0)) return std::nullopt;
    Assignment out(static_cast<size_t>(p_));
    for (int i = 0; i < p_; ++i) out[static_cast<size_t>(i)] = value_[static_cast<size_t>(i)] == 1;
    return out;
  }

 private:
  static constexpr int kUnassigned = -1;

  bool Search(int var) {
    while (var < p_ && value_[static_cast<size_t>(var)] != kUnassigned) ++var;
    if (var == p_) return true;
    for (int choice : {1, 0}) {
      const size_t mark = trail_.size();
      if (Assign(var, choice) && Search(var + 1)) return true;
      Undo(mark);
    }
    return false;
  }

  // Assigns and propagates to fixpoint; false on conflict (trail keeps the
  // partial work for Undo).
  bool Assign(int var, int val) {
    std::vector<std::pair<int, int>> queue{{var, val}};
    while (!queue.empty()) {
      auto [v, x] = queue.back();
      queue.pop_back();
      int& slot = value_[static_cast<size_t>(v)];
      if (slot != kUnassigned) {
        if (slot != x) return false;
        continue;
      }
      slot = x;
      trail_.push_back(v);
      for (size_t c : watches_[static_cast<size_t>(v)]) {
        --free_[c];
        trues_[c] += x;
      }
      for (size_t c : watches_[static_cast<size_t>(v)]) {
        if (!Check(c, queue)) return false;
      }
    }
    return true;
  }

  bool Propagate(size_t c) {
    std::vector<std::pair<int, int>> queue;
    if (!Check(c, queue)) return false;
    for (auto [v, x] : queue) {
      if (!Assign(v, x)) return false;
    }
    return true;
  }

  // Conflict test plus forced assignments once a bound is tight.
  bool Check(size_t c, std::vector<std::pair<int, int>>& queue) {
    const PBConstraint& con = constraints_[c];
    const int t = trues_[c];
    const int f = free_[c];
    int forced = -1;
    if (con.sense == Sense::kAtMost) {
      if (t > con.bound) return false;
      if (t == con.bound && f > 0) forced = 0;
    } else {
      if (t + f < con.bound) return false;
      if (t + f == con.bound && f > 0) forced = 1;
    }
    if (forced >= 0) {
      for (int v : con.vars) {
        if (value_[static_cast<size_t>(v)] == kUnassigned) queue.emplace_back(v, forced);
      }
    }
    return true;
  }

  void Undo(size_t mark) {
    while (trail_.size() > mark) {
      const int v = trail_.back();
      trail_.pop_back();
      const int x = value_[static_cast<size_t>(v)];
      for (size_t c : watches_[static_cast<size_t>(v)]) {
        ++free_[c];
        trues_[c] -= x;
      }
      value_[static_cast<size_t>(v)] = kUnassigned;
    }
  }

  int p_;
  std::vector<PBConstraint> constraints_;
  std::vector<int> value_;
  std::vector<std::vector<size_t>> watches_;
  std::vector<int> trues_;
  std::vector<int> free_;
  std::vector<int> trail_;
};

}  // namespace

std::optional<Assignment> Solve(const PBFormula& formula) {
  const int p = formula.num_vars();
  if (p == 0) {
    // Only constraints over no variables could exist, and Add rejects them.
    return Assignment{};
  }
  for (int count = 0; count <= p; ++count) {
    CardinalitySearch search(formula, count);
    if (auto model = search.Run()) return model;
  }
  return std::nullopt;
}

}  // namespace secest
