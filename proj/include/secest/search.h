#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "secest/common.h"
#include "secest/detect.h"
#include "secest/kalman.h"
#include "secest/model.h"
#include "secest/pbsat.h"

namespace secest {

/// Answers "is this subset attack-free?" for the search procedures.
class SubsetTheory {
 public:
  virtual ~SubsetTheory() = default;
  virtual Detection Check(const SensorSubset& s) = 0;
  /// Seconds spent in work that searches should not be charged for
  /// (precomputed filter banks built on demand).
  virtual double ExcludedSeconds() const { return 0.0; }
};

/// Runs AttackDetect from scratch on every query.
class DirectTheory : public SubsetTheory {
 public:
  DirectTheory(const SystemModel& model, const Trajectory& traj, const DetectorConfig& cfg)
      : model_(model), traj_(traj), cfg_(cfg) {}
  Detection Check(const SensorSubset& s) override;

 private:
  const SystemModel& model_;
  const Trajectory& traj_;
  const DetectorConfig& cfg_;
};

/// Trajectory-independent per-subset data. Shareable across trajectories of
/// the same model.
struct SubsetModelData {
  SteadyStateFilter filter;
  double eta = 0.0;
};

/// Thread-safe.
class SubsetModelCache {
 public:
  SubsetModelCache(const SystemModel& model, const DetectorConfig& cfg);
  std::shared_ptr<const SubsetModelData> Get(const SensorSubset& s);
  const SystemModel& model() const { return model_; }
  const std::vector<Matrix>& blocks() const { return blocks_; }
  const std::vector<double>& lambda_max() const { return lambda_max_; }
  /// M over all sensors; M_s is its (s, s) block.
  const Matrix& noise_covariance() const { return M_full_; }
  /// Row indices of the subset's windows in all-sensor stacks.
  std::vector<Eigen::Index> Rows(const SensorSubset& s) const;
  /// Attack-free residue expectation for the subset.
  Matrix Expected(const SensorSubset& s, const SteadyStateFilter& filter) const;

 private:
  SystemModel model_;
  DetectorConfig cfg_;
  std::vector<Matrix> blocks_;
  std::vector<double> lambda_max_;
  Matrix M_full_;
  std::mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<const SubsetModelData>> entries_;
};

/// Bank of Kalman filters over one trajectory. Each entry keeps the moments
/// sum x_hat x_hat' / N and sum x_hat ybar_s' / N; with the trajectory's output
/// moment sum ybar ybar' / N this gives the residue sample matrix without
/// another pass over the window. Entries are built on first use and their
/// build time is reported as excluded. Estimates are kept only for subsets
/// that passed.
class DetectionBank : public SubsetTheory {
 public:
  DetectionBank(std::shared_ptr<SubsetModelCache> cache, const Trajectory& traj,
                const DetectorConfig& cfg);

  Detection Check(const SensorSubset& s) override;
  double ExcludedSeconds() const override { return build_seconds_; }

  void Precompute(const std::vector<SensorSubset>& subsets);
  int size() const { return static_cast<int>(entries_.size()); }

 private:
  struct Entry {
    std::shared_ptr<const SubsetModelData> data;
    std::shared_ptr<const FilterRun> run;  // released once the subset fails
    Matrix Sxx;
    Matrix Sxy;  // n x n|s|
  };
  Entry& GetEntry(const SensorSubset& s);

  std::shared_ptr<SubsetModelCache> cache_;
  const Trajectory& traj_;
  DetectorConfig cfg_;
  int n_;
  int t1_;
  int window_;
  Matrix ybar_;  // np x N, all sensors
  Matrix Syy_;   // np x np
  std::map<std::uint64_t, Entry> entries_;
  double build_seconds_ = 0.0;
};

/// One attack_detect call made while generating a certificate.
struct CertificateProbe {
  SensorSubset subset;
  int flag = 0;
};

/// Result of one hypothesis check inside a search.
struct CheckResult {
  Detection detection;
  bool untestable = false;
  std::string error;
};

/// theory.Check, mapping an AnalysisError to an untestable failing result.
CheckResult CheckHypothesis(SubsetTheory& theory, const SensorSubset& s);

struct CertificateResult {
  std::vector<PBConstraint> constraints;
  std::vector<CertificateProbe> probes;
};

/// One theory query on a SAT-proposed (or enumerated) hypothesis.
struct SearchStep {
  SensorSubset subset;
  int flag = 0;
  /// attack_detect raised an analysis error (e.g. numerically unobservable
  /// subset); the hypothesis is treated as failing.
  bool untestable = false;
  double max_deviation = 0.0;
  double eta = 0.0;
  std::vector<CertificateProbe> probes;
  std::vector<PBConstraint> certificates;
};

struct SearchOutcome {
  std::string method;
  bool found = false;
  SensorSubset subset;
  std::shared_ptr<const FilterRun> estimates;
  std::optional<ResidueReport> report;
  /// Every attack_detect invocation, certificate probes included.
  long theory_checks = 0;
  /// Hypotheses proposed by enumeration or by the SAT solver.
  long hypotheses = 0;
  std::vector<PBConstraint> certificates;
  std::vector<SearchStep> steps;
  double wall_time = 0.0;
  std::vector<std::string> warnings;
};

/// Message when 2k exceeds the sparse observability index (nullopt otherwise).
std::optional<std::string> SparseObservabilityWarning(const SystemModel& model, int k);

/// Tries every (p-k)-subset in lexicographic order; returns the first one
/// passing the residue test.
SearchOutcome ExhaustiveSearch(SubsetTheory& theory, int p, int k);
SearchOutcome ExhaustiveSearch(const SystemModel& model, const Trajectory& traj, int k,
                               const DetectorConfig& cfg);

/// Certificate-guided search: the SAT solver proposes an attacked set b with
/// sum b_i <= k, the residue test checks s(b) = {1..p} \ supp(b), and failures
/// add cardinality certificates until a hypothesis passes or the formula is
/// UNSAT.
SearchOutcome SmtSearch(SubsetTheory& theory, int p, int k);
SearchOutcome SmtSearch(const SystemModel& model, const Trajectory& traj, int k,
                        const DetectorConfig& cfg);

/// Certificates for a failing subset s: the trivial one over s, then one per
/// still-failing shrunken subset, removing sensors in ascending order of
/// their normalized residue statistic (first p - 2k + 1 of them).
CertificateResult GenerateCertificate(SubsetTheory& theory, const SensorSubset& s,
                                      const ResidueReport& failing_report, int p, int k);
CertificateResult GenerateCertificate(const SystemModel& model, const Trajectory& traj,
                                      const SensorSubset& s, const ResidueReport& failing_report,
                                      const DetectorConfig& cfg, int k);

}  // namespace secest
