#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bdt/model.hpp"
#include "bdt/realization.hpp"

namespace bdt {

// One replicate of a campaign: its seed and the raw values it produced, in a
// fixed order. Serialized one per line by write_results.
struct ReplicationRecord {
  std::string campaign;
  std::uint64_t replicate = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> values;

  friend bool operator==(const ReplicationRecord&, const ReplicationRecord&) = default;
};

enum class StatisticKind { kFaceCount, kSkeletonVolume };

// X_k (centers of k-faces in the window) or Y_k (k-volume of the k-skeleton).
struct Statistic {
  StatisticKind kind = StatisticKind::kFaceCount;
  int k = 0;

  std::string name() const;  // "X0", "Y1", ...
  static Statistic parse(const std::string& name);
  friend bool operator==(const Statistic&, const Statistic&) = default;
};

// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and
// `cdf`. Throws EmptyInputError on an empty sample.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);
double standard_normal_cdf(double x);

// Values of every statistic at every window for one replicate:
// result[s][w] for statistics[s] on I_{windows[w]}.
using ReplicateFn = std::function<std::vector<std::vector<double>>(std::uint64_t seed)>;

struct ExperimentConfig {
  ModelParams model = ModelParams::beta(3, 0.0);
  std::vector<Statistic> statistics = {Statistic{}};
  std::vector<double> windows = {8};  // half-widths n of I_n
  int replicates = 300;
  std::uint64_t seed = 1;
  double ks_slack = 0.15;       // threshold 1.36 / sqrt(M) * (1 + slack)
  double variance_band = 0.25;  // allowed |ratio - 1| between successive n
  int bootstrap_resamples = 1000;
  double confidence = 0.95;
  bool allow_beta_prime = false;  // CLT for the beta-prime model is not established
  GrowthOptions growth;
};

// Certified realization per replicate, stabilized beyond the largest window,
// with all statistics evaluated on it.
ReplicateFn certified_statistics(const ExperimentConfig& config);

struct CltRow {
  Statistic statistic;
  double n = 0;
  double mean = 0;
  double variance = 0;
  double normalized_variance = 0;  // (2n)^{-(d-1)} Var
  double ks = 0;
  double ks_threshold = 0;
  bool pass = false;
  std::vector<double> standardized;
};

struct CltReport {
  std::vector<CltRow> rows;
  std::string verdict;  // "pass", "fail", "insufficient replicates"
  bool pass = false;
  bool unsupported = false;  // beta-prime run under the override
  std::vector<ReplicationRecord> records;
};

// Replicates come from `source` when given, else from certified_statistics.
CltReport run_clt(const ExperimentConfig& config, const ReplicateFn& source = {});

struct VarianceRow {
  Statistic statistic;
  double n = 0;
  double normalized_variance = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  std::optional<double> ratio_to_previous;
  bool positive = false;
  bool ratio_ok = true;
};

struct VarianceReport {
  std::vector<VarianceRow> rows;
  bool positivity = false;
  bool stabilization = false;
  bool pass = false;
  std::vector<ReplicationRecord> records;
};

// Needs at least three window sizes.
VarianceReport estimate_variance_scaling(const ExperimentConfig& config,
                                         const ReplicateFn& source = {});

struct StabilizationConfig {
  ModelParams model = ModelParams::beta(3, 0.0);
  double R = 0.5;
  std::vector<double> r_grid = {0, 0.5, 1, 1.5, 2, 3};
  int replicates = 1000;
  std::uint64_t seed = 1;
  GrowthOptions growth;
};

struct StabilizationRow {
  double r = 0;
  std::size_t changed = 0;      // changed at some r'' >= r
  std::size_t raw_changed = 0;  // changed at r itself
  double p_hat = 0;
  double wilson_lo = 0;
  double wilson_hi = 0;
  double raw_p_hat = 0;
};

struct StabilizationReport {
  std::vector<StabilizationRow> rows;
  std::optional<double> fitted_slope;  // empty when fewer than two usable nodes
  double reference_slope = 0;
  std::string fit;  // which regression was run
  int fit_nodes = 0;
  bool monotone = false;
  std::size_t undetermined = 0;  // replicates that hit the growth caps
  std::vector<ReplicationRecord> records;
};

// Coupled probe: each replicate draws xi and an independent xi'; for every r
// the configuration xi inside B_{R+r} plus xi' outside is triangulated and its
// cells meeting B_R compared with those of xi. Replicates whose certification
// exceeds the growth caps are counted as undetermined and left out of p_hat.
StabilizationReport run_stabilization_probe(const StabilizationConfig& config);

// Slope of log(-log p) (beta, Gaussian) or log p (beta-prime) against log r
// over the nodes with 0 < p <= 0.9, together with the reference exponent.
struct DecayFit {
  std::optional<double> slope;
  double reference = 0;
  std::string kind;
  int nodes = 0;
};
DecayFit fit_decay(const ModelParams& model, const std::vector<double>& r,
                   const std::vector<double>& p);

struct TailCheckConfig {
  ModelParams model = ModelParams::beta(3, 0.0);
  std::vector<double> radii = {1};
  // Levels per radius; empty means default_sup_levels / default_inf_levels.
  std::vector<std::vector<double>> sup_levels;
  std::vector<std::vector<double>> inf_levels;
  int replicates = 2000;
  std::uint64_t seed = 1;
  double grid_step = 0.05;
  double initial_epsilon = 1.0 / 16;  // beta-prime only
  int max_halvings = 20;
};

std::vector<double> default_sup_levels(const ModelParams& model, double A);
std::vector<double> default_inf_levels(const ModelParams& model, double A);

struct TailNode {
  double A = 0;
  double level = 0;
  bool upper = true;  // true: P(sup > level), false: P(inf < level)
  std::size_t exceed = 0;
  std::size_t replicates = 0;
  double frequency = 0;
  double standard_error = 0;  // binomial, evaluated at p = bound
  double bound = 0;
  bool pass = false;
};

struct BoundCheckReport {
  std::vector<TailNode> nodes;
  bool pass = false;
  std::size_t undetermined = 0;  // beta-prime replicates counted as exceeding
  std::vector<ReplicationRecord> records;
};

BoundCheckReport run_tail_bound_check(const TailCheckConfig& config);

struct DecorrelationConfig {
  ModelParams model = ModelParams::beta(3, 0.0);
  double a = 2;
  std::vector<double> b_grid = {2, 3, 4, 6};
  int replicates = 400;
  std::uint64_t seed = 1;
  bool independent_null = false;  // annulus statistic from an independent realization
  GrowthOptions growth;
};

struct DecorrelationRow {
  double b = 0;
  double correlation = 0;
  double threshold = 0;  // 2 / sqrt(M)
  bool indistinguishable = false;
};

// Proxy for absolute regularity: correlation of the vertex counts in B_a and
// in B_{b+1} \ B_b. The partition supremum itself is not computed.
struct DecorrelationReport {
  std::vector<DecorrelationRow> rows;
  std::vector<ReplicationRecord> records;
};

DecorrelationReport run_decorrelation_probe(const DecorrelationConfig& config);

}  // namespace bdt
