#include "secest/search.h"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numeric>

#include "secest/obsv.h"

namespace secest {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void CheckSearchArgs(int p, int k) {
  if (k < 0 || k >= p) throw ConfigError("search needs 0 <= k < p");
}

}  // namespace

std::optional<std::string> SparseObservabilityWarning(const SystemModel& model, int k) {
  // 2k <= theta iff every (p - 2k)-subset is observable.
  const int size = model.p() - 2 * k;
  if (size < 1) return "2k >= p: the system cannot be 2k-sparse observable";
  std::optional<SensorSubset> bad;
  ForEachSubset(model.p(), size, [&](const SensorSubset& s) {
    if (!IsObservable(model, s)) bad = s;
    return !bad;
  });
  if (bad) {
    return "system is not 2k-sparse observable (" + bad->ToString() +
           " is unobservable); the search result carries no guarantee";
  }
  return std::nullopt;
}

CheckResult CheckHypothesis(SubsetTheory& theory, const SensorSubset& s) {
  CheckResult out;
  try {
    out.detection = theory.Check(s);
  } catch (const AnalysisError& e) {
    out.untestable = true;
    out.error = e.what();
    out.detection.flag = 1;
    out.detection.report.subset = s;
    out.detection.report.max_deviation = std::numeric_limits<double>::infinity();
  }
  return out;
}

Detection DirectTheory::Check(const SensorSubset& s) { return AttackDetect(model_, traj_, s, cfg_); }

SubsetModelCache::SubsetModelCache(const SystemModel& model, const DetectorConfig& cfg)
    : model_(model), cfg_(cfg), blocks_(SensorBlocks(model)), lambda_max_(SensorLambdaMax(blocks_)) {
  M_full_ = NoiseCovarianceFromStack(StackBlocks(blocks_, SensorSubset::Full(model_.p())), model_.n(),
                                     model_.sigma_w2, model_.sigma_v2);
}

std::vector<Eigen::Index> SubsetModelCache::Rows(const SensorSubset& s) const {
  const int n = model_.n();
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<size_t>(n * s.size()));
  for (int i : s) {
    for (int j = 0; j < n; ++j) rows.push_back((i - 1) * n + j);
  }
  return rows;
}

Matrix SubsetModelCache::Expected(const SensorSubset& s, const SteadyStateFilter& filter) const {
  const auto rows = Rows(s);
  return ExpectedResidueMatrix(StackBlocks(blocks_, s), M_full_(rows, rows), filter, model_.sigma_v2);
}

std::shared_ptr<const SubsetModelData> SubsetModelCache::Get(const SensorSubset& s) {
  const auto key = s.Mask();
  std::lock_guard<std::mutex> lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  auto data = std::make_shared<SubsetModelData>();
  data->filter = SolveSteadyState(model_, s, cfg_.mode, cfg_.riccati);
  data->eta = ResolveEta(model_, s, cfg_);
  entries_.emplace(key, data);
  return data;
}

DetectionBank::DetectionBank(std::shared_ptr<SubsetModelCache> cache, const Trajectory& traj,
                             const DetectorConfig& cfg)
    : cache_(std::move(cache)), traj_(traj), cfg_(cfg) {
  const auto start = Clock::now();
  n_ = cache_->model().n();
  t1_ = cfg_.StartTime(n_);
  window_ = cfg_.EffectiveWindow(n_);
  if (traj_.horizon < cfg_.RequiredHorizon(n_)) {
    throw RangeError("horizon " + std::to_string(traj_.horizon) + " too short for the bank; need " +
                     std::to_string(cfg_.RequiredHorizon(n_)));
  }
  ybar_ = BlockOutputWindow(traj_, SensorSubset::Full(traj_.p()), t1_, window_);
  Syy_ = SampleSecondMoment(ybar_);
  build_seconds_ += SecondsSince(start);
}

DetectionBank::Entry& DetectionBank::GetEntry(const SensorSubset& s) {
  const auto key = s.Mask();
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  const auto start = Clock::now();
  Entry entry;
  entry.data = cache_->Get(s);
  auto run = std::make_shared<FilterRun>(RunFilter(entry.data->filter, traj_, t1_, t1_ + window_ - 1));
  const Matrix ys = ybar_(cache_->Rows(s), Eigen::all);
  entry.Sxy.noalias() = run->estimates * ys.transpose() / window_;
  entry.Sxx = SampleSecondMoment(run->estimates);
  entry.run = std::move(run);
  build_seconds_ += SecondsSince(start);
  return entries_.emplace(key, std::move(entry)).first->second;
}

void DetectionBank::Precompute(const std::vector<SensorSubset>& subsets) {
  for (const auto& s : subsets) GetEntry(s);
}

Detection DetectionBank::Check(const SensorSubset& s) {
  Entry& entry = GetEntry(s);
  const Matrix O = StackBlocks(cache_->blocks(), s);
  const auto rows = cache_->Rows(s);
  // (1/N) sum (ybar - O x)(ybar - O x)'
  Matrix cross = O * entry.Sxy;
  Matrix sample = Syy_(rows, rows);
  sample -= cross + cross.transpose();
  sample.noalias() += O * entry.Sxx * O.transpose();

  Detection out;
  out.report = EvaluateResidueTest(cache_->blocks(), cache_->lambda_max(), s, std::move(sample),
                                   cache_->Expected(s, entry.data->filter), entry.data->eta, cfg_.mode,
                                   t1_, window_);
  out.flag = out.report.passed ? 0 : 1;
  out.estimates = entry.run;
  if (out.flag == 1) entry.run.reset();
  return out;
}

CertificateResult GenerateCertificate(SubsetTheory& theory, const SensorSubset& s,
                                      const ResidueReport& failing_report, int p, int k) {
  CertificateResult result;
  result.constraints.push_back(PBConstraint::Certificate(s));
  const int seeds = p - 2 * k + 1;
  if (s.size() <= seeds || seeds <= 0) return result;
  if (static_cast<int>(failing_report.per_sensor_mu_normalized.size()) != s.size()) {
    throw ConfigError("residue report does not match the failing subset");
  }

  std::vector<int> order(static_cast<size_t>(s.size()));
  std::iota(order.begin(), order.end(), 0);
  // Ascending normalized residue; equal values keep sensor order.
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return failing_report.per_sensor_mu_normalized[static_cast<size_t>(a)] <
           failing_report.per_sensor_mu_normalized[static_cast<size_t>(b)];
  });

  SensorSubset shrunk = s;
  for (int pos = 0; pos < seeds; ++pos) {
    shrunk = shrunk.Without(s[order[static_cast<size_t>(pos)]]);
    // The threshold rule needs |s'| > k.
    if (shrunk.size() <= k) break;
    Detection probe;
    try {
      probe = theory.Check(shrunk);
    } catch (const AnalysisError&) {
      // s' cannot be tested (unobservable or degenerate threshold).
      break;
    }
    result.probes.push_back({shrunk, probe.flag});
    if (probe.flag == 0) break;
    result.constraints.push_back(PBConstraint::Certificate(shrunk));
  }
  return result;
}

CertificateResult GenerateCertificate(const SystemModel& model, const Trajectory& traj,
                                      const SensorSubset& s, const ResidueReport& failing_report,
                                      const DetectorConfig& cfg, int k) {
  DirectTheory theory(model, traj, cfg);
  return GenerateCertificate(theory, s, failing_report, model.p(), k);
}

SearchOutcome ExhaustiveSearch(SubsetTheory& theory, int p, int k) {
  CheckSearchArgs(p, k);
  const auto start = Clock::now();
  const double excluded_before = theory.ExcludedSeconds();
  SearchOutcome outcome;
  outcome.method = "exhaustive";
  ForEachSubset(p, p - k, [&](const SensorSubset& s) {
    CheckResult check = CheckHypothesis(theory, s);
    Detection& d = check.detection;
    ++outcome.theory_checks;
    ++outcome.hypotheses;
    outcome.steps.push_back({s, d.flag, check.untestable, d.report.max_deviation, d.report.eta, {}, {}});
    if (check.untestable) outcome.warnings.push_back(check.error);
    if (d.flag == 0) {
      outcome.found = true;
      outcome.subset = s;
      outcome.estimates = d.estimates;
      outcome.report = std::move(d.report);
      return false;
    }
    return true;
  });
  outcome.wall_time = SecondsSince(start) - (theory.ExcludedSeconds() - excluded_before);
  return outcome;
}

SearchOutcome ExhaustiveSearch(const SystemModel& model, const Trajectory& traj, int k,
                               const DetectorConfig& cfg) {
  DirectTheory theory(model, traj, cfg);
  auto outcome = ExhaustiveSearch(theory, model.p(), k);
  if (auto warning = SparseObservabilityWarning(model, k)) outcome.warnings.push_back(*warning);
  return outcome;
}

SearchOutcome SmtSearch(SubsetTheory& theory, int p, int k) {
  CheckSearchArgs(p, k);
  const auto start = Clock::now();
  const double excluded_before = theory.ExcludedSeconds();
  SearchOutcome outcome;
  outcome.method = "smt";

  std::vector<int> all(static_cast<size_t>(p));
  std::iota(all.begin(), all.end(), 0);
  PBFormula formula(p);
  formula.Add(PBConstraint::AtMost(all, k));

  while (true) {
    auto b = Solve(formula);
    if (!b) break;
    std::vector<int> clean;
    for (int i = 0; i < p; ++i) {
      if (!(*b)[static_cast<size_t>(i)]) clean.push_back(i + 1);
    }
    SensorSubset s(clean);
    CheckResult check = CheckHypothesis(theory, s);
    Detection& d = check.detection;
    ++outcome.theory_checks;
    ++outcome.hypotheses;
    SearchStep step{s, d.flag, check.untestable, d.report.max_deviation, d.report.eta, {}, {}};
    if (d.flag == 0) {
      outcome.steps.push_back(std::move(step));
      outcome.found = true;
      outcome.subset = s;
      outcome.estimates = d.estimates;
      outcome.report = std::move(d.report);
      break;
    }
    CertificateResult certs;
    if (check.untestable) {
      // No residues to rank; only the current hypothesis is excluded.
      outcome.warnings.push_back(check.error);
      certs.constraints.push_back(PBConstraint::Certificate(s));
    } else {
      certs = GenerateCertificate(theory, s, d.report, p, k);
    }
    outcome.theory_checks += static_cast<long>(certs.probes.size());
    for (const auto& c : certs.constraints) {
      formula.Add(c);
      outcome.certificates.push_back(c);
    }
    step.probes = std::move(certs.probes);
    step.certificates = std::move(certs.constraints);
    outcome.steps.push_back(std::move(step));
  }
  outcome.wall_time = SecondsSince(start) - (theory.ExcludedSeconds() - excluded_before);
  return outcome;
}

SearchOutcome SmtSearch(const SystemModel& model, const Trajectory& traj, int k,
                        const DetectorConfig& cfg) {
  DirectTheory theory(model, traj, cfg);
  auto outcome = SmtSearch(theory, model.p(), k);
  if (auto warning = SparseObservabilityWarning(model, k)) outcome.warnings.push_back(*warning);
  return outcome;
}

}  // namespace secest
