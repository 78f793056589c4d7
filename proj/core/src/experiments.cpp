#include "bdt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "bdt/error.hpp"
#include "bdt/geometry.hpp"
#include "bdt/parallel.hpp"
#include "bdt/point_process.hpp"
#include "bdt/rng.hpp"
#include "bdt/stats.hpp"

namespace bdt {

namespace {

// Seed streams of the campaigns; replicate k of a campaign with master seed m
// uses derive_seed(m, stream, k).
enum : std::uint64_t {
  kCltStream = 11,
  kVarianceStream = 12,
  kBootstrapStream = 13,
  kStabilizationStream = 21,
  kTailStream = 31,
  kDecorrelationStream = 41,
};

constexpr int kMinKsReplicates = 10;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

std::string keyed(const std::string& name, const char* param, double value) {
  return name + "[" + param + "=" + fmt(value) + "]";
}

double mean_of(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Unbiased sample variance, two-pass.
double variance_of(const std::vector<double>& x) {
  if (x.size() < 2) return 0;
  const double m = mean_of(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

void check_replicates(int m) {
  if (m < 2) throw DomainError("a campaign needs at least 2 replicates");
}

// Replicate values [replicate][statistic][window] plus their records.
struct ReplicateTable {
  std::vector<std::vector<std::vector<double>>> values;
  std::vector<ReplicationRecord> records;
};

ReplicateTable collect(const ExperimentConfig& config, const ReplicateFn& source,
                       std::uint64_t stream, const std::string& campaign) {
  check_replicates(config.replicates);
  if (config.statistics.empty()) throw DomainError("no statistics requested");
  if (config.windows.empty()) throw DomainError("no window sizes requested");
  const ReplicateFn fn = source ? source : certified_statistics(config);
  const std::size_t M = config.replicates;
  ReplicateTable table;
  table.values = parallel_map<std::vector<std::vector<double>>>(M, [&](std::size_t k) {
    auto v = fn(derive_seed(config.seed, stream, k));
    if (v.size() != config.statistics.size())
      throw DomainError("replicate source returned the wrong number of statistics");
    for (const auto& row : v)
      if (row.size() != config.windows.size())
        throw DomainError("replicate source returned the wrong number of windows");
    return v;
  });
  for (std::size_t k = 0; k < M; ++k) {
    ReplicationRecord rec;
    rec.campaign = campaign;
    rec.replicate = k;
    rec.seed = derive_seed(config.seed, stream, k);
    for (std::size_t s = 0; s < config.statistics.size(); ++s)
      for (std::size_t w = 0; w < config.windows.size(); ++w)
        rec.values.emplace_back(keyed(config.statistics[s].name(), "n", config.windows[w]),
                                table.values[k][s][w]);
    table.records.push_back(std::move(rec));
  }
  return table;
}

std::vector<double> column(const ReplicateTable& t, std::size_t s, std::size_t w) {
  std::vector<double> x;
  x.reserve(t.values.size());
  for (const auto& rep : t.values) x.push_back(rep[s][w]);
  return x;
}

double normalization(const ModelParams& model, double n) {
  return std::pow(2 * n, model.spatial_dim());
}

std::pair<double, double> wilson(std::size_t successes, std::size_t n) {
  if (n == 0) return {0, 1};
  const double z = 1.959963984540054;
  const double p = static_cast<double>(successes) / n;
  const double denom = 1 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == n ? 1.0 : std::min(1.0, centre + half)};
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("BDT_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min(n, 1024L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string Statistic::name() const {
  return (kind == StatisticKind::kFaceCount ? "X" : "Y") + std::to_string(k);
}

Statistic Statistic::parse(const std::string& name) {
  if (name.size() < 2 || (name[0] != 'X' && name[0] != 'Y'))
    throw DomainError("statistic must be X<k> or Y<k>, got '" + name + "'");
  Statistic s;
  s.kind = name[0] == 'X' ? StatisticKind::kFaceCount : StatisticKind::kSkeletonVolume;
  std::size_t used = 0;
  try {
    s.k = std::stoi(name.substr(1), &used);
  } catch (const std::exception&) {
    throw DomainError("statistic must be X<k> or Y<k>, got '" + name + "'");
  }
  if (used != name.size() - 1 || s.k < 0)
    throw DomainError("statistic must be X<k> or Y<k>, got '" + name + "'");
  return s;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw EmptyInputError("KS distance of an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

ReplicateFn certified_statistics(const ExperimentConfig& config) {
  const int D = config.model.spatial_dim();
  for (const auto& s : config.statistics)
    if (s.k < 0 || s.k > D) throw DomainError("statistic " + s.name() + " needs k <= d-1");
  const double n_max = *std::max_element(config.windows.begin(), config.windows.end());
  if (!(n_max > 0)) throw DomainError("window sizes must be positive");
  const double R = n_max * std::sqrt(static_cast<double>(D)) + 1;
  return [config, R, D](std::uint64_t seed) {
    const auto real = certified_realization(config.model, R, seed, config.growth);
    std::vector<std::vector<double>> out;
    for (const auto& s : config.statistics) {
      std::vector<double> row;
      for (double n : config.windows) {
        const auto w = WindowBox::cube(D, n);
        row.push_back(s.kind == StatisticKind::kFaceCount
                          ? static_cast<double>(count_faces_in_window(real.tessellation, s.k, w,
                                                                      WindowCheck::kCertified))
                          : skeleton_volume_in_window(real.tessellation, s.k, w,
                                                      WindowCheck::kCertified));
      }
      out.push_back(std::move(row));
    }
    return out;
  };
}

CltReport run_clt(const ExperimentConfig& config, const ReplicateFn& source) {
  CltReport report;
  if (config.model.kind() == ModelKind::kBetaPrime) {
    if (!config.allow_beta_prime)
      throw DomainError(
          "no central limit theorem is available for the beta-prime model; set "
          "allow_beta_prime to run anyway");
    report.unsupported = true;
  }
  const auto table = collect(config, source, kCltStream, "clt");
  const std::size_t M = config.replicates;
  const double threshold = 1.36 / std::sqrt(static_cast<double>(M)) * (1 + config.ks_slack);
  bool all_pass = true;
  for (std::size_t s = 0; s < config.statistics.size(); ++s) {
    for (std::size_t w = 0; w < config.windows.size(); ++w) {
      CltRow row;
      row.statistic = config.statistics[s];
      row.n = config.windows[w];
      const auto x = column(table, s, w);
      row.mean = mean_of(x);
      row.variance = variance_of(x);
      row.normalized_variance = row.variance / normalization(config.model, row.n);
      const double sd = std::sqrt(row.variance);
      for (double v : x) row.standardized.push_back(sd > 0 ? (v - row.mean) / sd : 0.0);
      if (sd > 0) {
        // A second pass in standardized units removes the rounding of the mean.
        const double m2 = mean_of(row.standardized);
        for (double& z : row.standardized) z -= m2;
        const double s2 = std::sqrt(variance_of(row.standardized));
        for (double& z : row.standardized) z /= s2;
      }
      row.ks = ks_distance(row.standardized, standard_normal_cdf);
      row.ks_threshold = threshold;
      row.pass = sd > 0 && row.ks < threshold;
      all_pass = all_pass && row.pass;
      report.rows.push_back(std::move(row));
    }
  }
  if (static_cast<int>(M) < kMinKsReplicates) {
    report.verdict = "insufficient replicates";
    report.pass = false;
  } else {
    report.pass = all_pass;
    report.verdict = all_pass ? "pass" : "fail";
  }
  report.records = table.records;
  return report;
}

VarianceReport estimate_variance_scaling(const ExperimentConfig& config,
                                         const ReplicateFn& source) {
  if (config.windows.size() < 3) throw DomainError("variance scaling needs at least 3 window sizes");
  if (!(config.confidence > 0 && config.confidence < 1))
    throw DomainError("confidence must lie in (0, 1)");
  if (config.bootstrap_resamples < 10) throw DomainError("too few bootstrap resamples");
  auto windows = config.windows;
  if (!std::is_sorted(windows.begin(), windows.end()))
    throw DomainError("window sizes must be increasing");
  const auto table = collect(config, source, kVarianceStream, "variance");
  const std::size_t M = config.replicates;
  VarianceReport report;
  report.positivity = report.stabilization = true;
  for (std::size_t s = 0; s < config.statistics.size(); ++s) {
    std::optional<double> prev;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      VarianceRow row;
      row.statistic = config.statistics[s];
      row.n = windows[w];
      const auto x = column(table, s, w);
      const double norm = normalization(config.model, row.n);
      row.normalized_variance = variance_of(x) / norm;

      Rng rng(derive_seed(config.seed, kBootstrapStream, s * windows.size() + w));
      std::vector<double> boot(config.bootstrap_resamples);
      std::vector<double> resample(M);
      for (auto& b : boot) {
        for (auto& v : resample) v = x[rng.next_u64() % M];
        b = variance_of(resample) / norm;
      }
      std::sort(boot.begin(), boot.end());
      const double alpha = (1 - config.confidence) / 2;
      const auto at = [&](double q) {
        const auto i = static_cast<std::size_t>(std::floor(q * (boot.size() - 1)));
        return boot[std::min(i, boot.size() - 1)];
      };
      row.ci_lo = at(alpha);
      row.ci_hi = at(1 - alpha);
      row.positive = row.ci_lo > 0;
      if (prev) {
        row.ratio_to_previous = *prev > 0 ? row.normalized_variance / *prev
                                          : std::numeric_limits<double>::quiet_NaN();
        row.ratio_ok = std::fabs(*row.ratio_to_previous - 1) <= config.variance_band;
      }
      prev = row.normalized_variance;
      report.positivity = report.positivity && row.positive;
      report.stabilization = report.stabilization && row.ratio_ok;
      report.rows.push_back(row);
    }
  }
  report.pass = report.positivity && report.stabilization;
  report.records = table.records;
  return report;
}

DecayFit fit_decay(const ModelParams& model, const std::vector<double>& r,
                   const std::vector<double>& p) {
  DecayFit fit;
  const bool poly = model.kind() == ModelKind::kBetaPrime;
  switch (model.kind()) {
    case ModelKind::kBeta:
      fit.reference = model.d() + 1 + 2 * model.beta();
      break;
    case ModelKind::kGaussian:
      fit.reference = 2;
      break;
    case ModelKind::kBetaPrime:
      fit.reference = -(2 * model.beta() - model.d() - 1);
      break;
  }
  fit.kind = poly ? "log p vs log r" : "log(-log p) vs log r";
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < r.size() && i < p.size(); ++i) {
    if (!(r[i] > 0) || !(p[i] > 0) || p[i] > 0.9) continue;
    xs.push_back(std::log(r[i]));
    ys.push_back(poly ? std::log(p[i]) : std::log(-std::log(p[i])));
  }
  fit.nodes = static_cast<int>(xs.size());
  if (xs.size() < 2) return fit;
  const double mx = mean_of(xs), my = mean_of(ys);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx > 0) fit.slope = sxy / sxx;
  return fit;
}

StabilizationReport run_stabilization_probe(const StabilizationConfig& config) {
  check_replicates(config.replicates);
  if (!(config.R > 0)) throw DomainError("stabilization probe needs R > 0");
  if (config.r_grid.empty()) throw DomainError("empty r grid");
  for (std::size_t i = 0; i < config.r_grid.size(); ++i) {
    if (config.r_grid[i] < 0 || (i > 0 && !(config.r_grid[i] > config.r_grid[i - 1])))
      throw DomainError("r grid must be nonnegative and strictly increasing");
  }
  const ModelParams& model = config.model;
  const std::size_t G = config.r_grid.size();
  const double R = config.R;

  struct Outcome {
    std::vector<char> raw;
    std::size_t points = 0;
    int rounds = 0;
    bool undetermined = false;
  };
  const auto outcomes = parallel_map<Outcome>(config.replicates, [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(config.seed, kStabilizationStream, k);
    const double t0 = config.growth.initial_height.value_or(reference_height(model));
    GrowingSample xi(model, R + config.growth.initial_margin, t0, derive_seed(seed, 1, 0));
    GrowingSample other(model, R + config.growth.initial_margin, t0, derive_seed(seed, 2, 0));
    while (true) {
      const double A = xi.radius(), t = xi.height();
      bool ok = true, need_h = false, need_s = false;
      auto run = [&](const std::vector<SpacePoint>& pts) {
        Certification c = certify(model, pts, A, t, R);
        ok = ok && c.radius >= R;
        need_h = need_h || c.needs_height;
        need_s = need_s || c.needs_space;
        return c.radius >= R ? cell_signatures(restrict_to_ball(c.tessellation, R))
                             : std::set<CellSignature>{};
      };
      const auto base = run(xi.points());
      Outcome out;
      out.raw.assign(G, 0);
      for (std::size_t g = 0; g < G && ok; ++g) {
        const double cut2 = (R + config.r_grid[g]) * (R + config.r_grid[g]);
        std::vector<SpacePoint> mixed;
        for (const auto& p : xi.points())
          if (p.v.norm2() < cut2) mixed.push_back(p);
        for (const auto& p : other.points())
          if (!(p.v.norm2() < cut2)) mixed.push_back(p);
        const auto sig = run(mixed);
        out.raw[g] = ok && sig != base;
      }
      if (ok) {
        out.points = xi.points().size();
        out.rounds = xi.rounds();
        return out;
      }
      if (xi.rounds() >= config.growth.max_rounds ||
          xi.points().size() + other.points().size() > config.growth.max_points) {
        Outcome out;
        out.undetermined = true;
        out.points = xi.points().size();
        out.rounds = xi.rounds();
        return out;
      }
      if (!need_h && !need_s) need_h = need_s = true;
      const double A2 = A + (need_s ? kRadiusStep : 0.0);
      const double t2 = need_h ? grown_height(model, t) : t;
      xi.grow(A2, t2);
      other.grow(A2, t2);
    }
  });

  StabilizationReport report;
  report.rows.resize(G);
  for (std::size_t k = 0; k < outcomes.size(); ++k) {
    const auto& o = outcomes[k];
    ReplicationRecord rec;
    rec.campaign = "stabilization";
    rec.replicate = k;
    rec.seed = derive_seed(config.seed, kStabilizationStream, k);
    rec.values.emplace_back("undetermined", o.undetermined ? 1.0 : 0.0);
    rec.values.emplace_back("points", static_cast<double>(o.points));
    rec.values.emplace_back("rounds", o.rounds);
    if (o.undetermined) {
      ++report.undetermined;
      report.records.push_back(std::move(rec));
      continue;
    }
    bool any = false;
    std::vector<char> monotone(G);
    for (std::size_t g = G; g-- > 0;) {
      any = any || o.raw[g];
      monotone[g] = any;
    }
    for (std::size_t g = 0; g < G; ++g) {
      report.rows[g].raw_changed += o.raw[g];
      report.rows[g].changed += monotone[g];
      rec.values.emplace_back(keyed("changed", "r", config.r_grid[g]), monotone[g]);
      rec.values.emplace_back(keyed("raw", "r", config.r_grid[g]), o.raw[g]);
    }
    report.records.push_back(std::move(rec));
  }
  const std::size_t M = outcomes.size() - report.undetermined;
  if (M == 0) throw StabilizationError("stabilization probe could not certify any replicate");
  std::vector<double> p;
  report.monotone = true;
  for (std::size_t g = 0; g < G; ++g) {
    auto& row = report.rows[g];
    row.r = config.r_grid[g];
    row.p_hat = static_cast<double>(row.changed) / M;
    row.raw_p_hat = static_cast<double>(row.raw_changed) / M;
    std::tie(row.wilson_lo, row.wilson_hi) = wilson(row.changed, M);
    if (g > 0 && row.changed > report.rows[g - 1].changed) report.monotone = false;
    p.push_back(row.p_hat);
  }
  const DecayFit fit = fit_decay(model, config.r_grid, p);
  report.fitted_slope = fit.slope;
  report.reference_slope = fit.reference;
  report.fit = fit.kind;
  report.fit_nodes = fit.nodes;
  return report;
}

std::vector<double> default_sup_levels(const ModelParams& model, double A) {
  const double base = 4 * A * A;
  switch (model.kind()) {
    case ModelKind::kBeta:
      return {base - 1, base, base + 0.5, base + 1, base + 1.5, base + 2, base + 3};
    case ModelKind::kGaussian:
      return {base - 4, base - 2, base, base + 2, base + 4, base + 6};
    case ModelKind::kBetaPrime:
      break;
  }
  return {-4, -1, -0.25, -0.05, 0, 0.5};
}

std::vector<double> default_inf_levels(const ModelParams& model, double) {
  switch (model.kind()) {
    case ModelKind::kBeta:
      return {0.1, 0.25, 0.5, 1, 2};
    case ModelKind::kGaussian:
      return {-10, -8, -6, -4, -2};
    case ModelKind::kBetaPrime:
      break;
  }
  return {-4, -2, -1, -0.5, -0.25};
}

BoundCheckReport run_tail_bound_check(const TailCheckConfig& config) {
  check_replicates(config.replicates);
  if (config.radii.empty()) throw DomainError("tail check needs at least one radius");
  if (!(config.grid_step > 0)) throw DomainError("grid_step must be positive");
  const ModelParams& model = config.model;
  const std::size_t nA = config.radii.size();
  std::vector<std::vector<double>> sup_levels(nA), inf_levels(nA);
  for (std::size_t a = 0; a < nA; ++a) {
    if (!(config.radii[a] > 0)) throw DomainError("tail check radii must be positive");
    sup_levels[a] = a < config.sup_levels.size() ? config.sup_levels[a]
                                                 : default_sup_levels(model, config.radii[a]);
    inf_levels[a] = a < config.inf_levels.size() ? config.inf_levels[a]
                                                 : default_inf_levels(model, config.radii[a]);
  }
  const bool bp = model.kind() == ModelKind::kBetaPrime;

  struct Extremes {
    std::vector<double> sup, inf, eps;
    std::size_t undetermined = 0;
  };
  const auto results = parallel_map<Extremes>(config.replicates, [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(config.seed, kTailStream, k);
    Extremes ex;
    for (std::size_t a = 0; a < nA; ++a) {
      const double A = config.radii[a];
      double top = -std::numeric_limits<double>::infinity();
      for (double l : sup_levels[a]) top = std::max(top, l);
      for (double l : inf_levels[a]) top = std::max(top, l);
      double eps = 0;
      if (bp) {
        // Every negative level must lie at or below the sampled apex -eps.
        eps = config.initial_epsilon;
        for (double l : sup_levels[a])
          if (l < 0) eps = std::min(eps, -l);
        for (double l : inf_levels[a])
          if (l < 0) eps = std::min(eps, -l);
        top = -eps;
      }
      if (model.kind() == ModelKind::kBeta && top <= 0) {
        ex.sup.push_back(std::numeric_limits<double>::infinity());
        ex.inf.push_back(std::numeric_limits<double>::infinity());
        ex.eps.push_back(0);
        continue;
      }
      GrowingSample sample(model, A, top, derive_seed(seed, 1 + a, 0));
      auto extremes = [&] {
        if (sample.points().empty())
          return EnvelopeExtremes{std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity(), 0, config.grid_step};
        PointSample ps;
        ps.points = sample.points();
        ps.model = model;
        return envelope_extremes(ps, A, config.grid_step);
      };
      EnvelopeExtremes e = extremes();
      if (bp) {
        bool needs_top = false;
        for (double l : sup_levels[a]) needs_top = needs_top || l >= -eps;
        // The envelope is below -eps everywhere once the sampled part is.
        int halvings = 0;
        while (needs_top && e.sup_est > -eps && halvings < config.max_halvings) {
          eps /= 2;
          sample.grow(A, -eps);
          e = extremes();
          ++halvings;
        }
        if (needs_top && e.sup_est > -eps) ++ex.undetermined;
      }
      ex.sup.push_back(e.sup_est);
      ex.inf.push_back(e.inf_est);
      ex.eps.push_back(eps);
    }
    return ex;
  });

  BoundCheckReport report;
  report.pass = true;
  for (std::size_t k = 0; k < results.size(); ++k) {
    ReplicationRecord rec;
    rec.campaign = "tail";
    rec.replicate = k;
    rec.seed = derive_seed(config.seed, kTailStream, k);
    for (std::size_t a = 0; a < nA; ++a) {
      rec.values.emplace_back(keyed("sup", "A", config.radii[a]), results[k].sup[a]);
      rec.values.emplace_back(keyed("inf", "A", config.radii[a]), results[k].inf[a]);
      if (bp) rec.values.emplace_back(keyed("eps", "A", config.radii[a]), results[k].eps[a]);
    }
    report.undetermined += results[k].undetermined;
    report.records.push_back(std::move(rec));
  }
  const std::size_t M = results.size();
  for (std::size_t a = 0; a < nA; ++a) {
    const double A = config.radii[a];
    auto finish = [&](TailNode node) {
      node.replicates = M;
      node.frequency = static_cast<double>(node.exceed) / M;
      const double b = std::clamp(node.bound, 0.0, 1.0);
      node.standard_error = std::sqrt(b * (1 - b) / M);
      node.pass = node.frequency <= node.bound + 3 * node.standard_error;
      report.pass = report.pass && node.pass;
      report.nodes.push_back(node);
    };
    for (double T : sup_levels[a]) {
      TailNode node;
      node.A = A;
      node.level = T;
      node.upper = true;
      node.bound = sup_tail_bound(model, A, T);
      for (std::size_t k = 0; k < M; ++k) {
        const double eps = bp ? results[k].eps[a] : 0;
        // Beta-prime levels above -eps: the full envelope is known to stay
        // below -eps when the sampled part does; otherwise count the replicate
        // as exceeding.
        const bool above = bp && T >= -eps ? results[k].sup[a] > -eps : results[k].sup[a] > T;
        node.exceed += above;
      }
      finish(node);
    }
    for (double t : inf_levels[a]) {
      TailNode node;
      node.A = A;
      node.level = t;
      node.upper = false;
      node.bound = inf_tail_bound(model, A, t);
      for (std::size_t k = 0; k < M; ++k) {
        // Beta-prime levels at or above 0 are reached almost surely.
        const bool below = (bp && t >= 0) || results[k].inf[a] < t;
        node.exceed += below;
      }
      finish(node);
    }
  }
  return report;
}

DecorrelationReport run_decorrelation_probe(const DecorrelationConfig& config) {
  check_replicates(config.replicates);
  if (!(config.a > 0)) throw DomainError("decorrelation probe needs a > 0");
  if (config.b_grid.empty()) throw DomainError("empty b grid");
  for (double b : config.b_grid)
    if (!(b >= config.a)) throw DomainError("every b must be at least a");
  const double b_max = *std::max_element(config.b_grid.begin(), config.b_grid.end());
  const double R = b_max + 1.5;
  const std::size_t G = config.b_grid.size();

  auto counts = [&](const Tessellation& t, double lo, double hi, bool closed_lo) {
    double n = 0;
    for (const auto& p : t.vertices) {
      const double r = std::sqrt(p.v.norm2());
      if ((closed_lo ? r >= lo : r > lo) && r <= hi) ++n;
    }
    return n;
  };
  struct Row {
    double inner = 0;
    std::vector<double> outer;
  };
  const auto rows = parallel_map<Row>(config.replicates, [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(config.seed, kDecorrelationStream, k);
    const auto real = certified_realization(config.model, R, derive_seed(seed, 1, 0), config.growth);
    Row row;
    row.inner = counts(real.tessellation, 0, config.a, true);
    if (config.independent_null) {
      const auto other =
          certified_realization(config.model, R, derive_seed(seed, 2, 0), config.growth);
      for (double b : config.b_grid) row.outer.push_back(counts(other.tessellation, b, b + 1, false));
    } else {
      for (double b : config.b_grid) row.outer.push_back(counts(real.tessellation, b, b + 1, false));
    }
    return row;
  });

  DecorrelationReport report;
  std::vector<double> inner;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    inner.push_back(rows[k].inner);
    ReplicationRecord rec;
    rec.campaign = "decorrelation";
    rec.replicate = k;
    rec.seed = derive_seed(config.seed, kDecorrelationStream, k);
    rec.values.emplace_back(keyed("X0_ball", "a", config.a), rows[k].inner);
    for (std::size_t g = 0; g < G; ++g)
      rec.values.emplace_back(keyed("X0_annulus", "b", config.b_grid[g]), rows[k].outer[g]);
    report.records.push_back(std::move(rec));
  }
  const double threshold = 2 / std::sqrt(static_cast<double>(rows.size()));
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> outer;
    for (const auto& r : rows) outer.push_back(r.outer[g]);
    DecorrelationRow row;
    row.b = config.b_grid[g];
    row.correlation = correlation(inner, outer);
    row.threshold = threshold;
    row.indistinguishable = std::fabs(row.correlation) < threshold;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace bdt
