#include "bdt/point_process.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bdt/error.hpp"
#include "bdt/rng.hpp"

namespace bdt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Mass of K(A, t) split by the binomial expansion of (A + sqrt(t - h))^{d-1}:
// term i collects A^i (t - h)^{(d-1-i)/2}.
std::vector<double> k_region_terms(const ModelParams& model, double A, double t) {
  if (!(A > 0) || !std::isfinite(A)) throw DomainError("K(A, t) requires A > 0");
  if (!std::isfinite(t)) throw DomainError("K(A, t) requires a finite t");
  const int D = model.spatial_dim();
  const double lc = std::log(intensity_constant(model) * kappa(D));
  const double beta = model.beta();
  std::vector<double> terms(D + 1, 0.0);
  switch (model.kind()) {
    case ModelKind::kBeta:
      if (t <= 0) return terms;
      for (int i = 0; i <= D; ++i) {
        const double a = (D - i) / 2.0;
        terms[i] = std::exp(lc + log_binomial(D, i) + i * std::log(A) +
                            (beta + 1 + a) * std::log(t) + log_beta_fn(beta + 1, a + 1));
      }
      return terms;
    case ModelKind::kBetaPrime:
      if (!(t < 0))
        throw DomainError("beta_prime model: K(A, t) has infinite mass unless t < 0");
      for (int i = 0; i <= D; ++i) {
        const double a = (D - i) / 2.0;
        terms[i] = std::exp(lc + log_binomial(D, i) + i * std::log(A) +
                            (a + 1 - beta) * std::log(-t) + log_beta_fn(beta - a - 1, a + 1));
      }
      return terms;
    case ModelKind::kGaussian:
      for (int i = 0; i <= D; ++i) {
        const double a = (D - i) / 2.0;
        terms[i] = std::exp(lc + t / 2 + log_binomial(D, i) + i * std::log(A) +
                            (a + 1) * std::log(2.0) + std::lgamma(a + 1));
      }
      return terms;
  }
  return terms;
}

double spatial_volume(int D, const SamplingWindow& w) {
  if (const auto* b = std::get_if<BallRegion>(&w.spatial)) return kappa(D) * std::pow(b->radius, D);
  const auto& box = std::get<BoxRegion>(w.spatial);
  double v = 1;
  for (int i = 0; i < D; ++i) v *= box.hi[i] - box.lo[i];
  return v;
}

// Height of a point of K(A, t) drawn from mixture component i, given u in (0, 1).
double k_component_height(const ModelParams& model, int D, int i, double t, double u) {
  const double a = (D - i) / 2.0;
  switch (model.kind()) {
    case ModelKind::kBeta:
      return t * boost::math::ibeta_inv(model.beta() + 1, a + 1, u);
    case ModelKind::kBetaPrime:
      return t / boost::math::ibeta_inv(model.beta() - a - 1, a + 1, u);
    case ModelKind::kGaussian:
      // t - h is Gamma(a + 1) with scale 2; large u gives small depth.
      return t - 2 * boost::math::gamma_q_inv(a + 1, u);
  }
  return 0;
}

// P(H <= h) under component i of the K(A, t) height mixture.
double k_component_cdf(const ModelParams& model, int D, int i, double t, double h) {
  const double a = (D - i) / 2.0;
  switch (model.kind()) {
    case ModelKind::kBeta:
      if (h <= 0) return 0;
      if (h >= t) return 1;
      return boost::math::ibeta(model.beta() + 1, a + 1, h / t);
    case ModelKind::kBetaPrime:
      if (h >= t) return 1;
      return boost::math::ibeta(model.beta() - a - 1, a + 1, t / h);
    case ModelKind::kGaussian:
      if (h >= t) return 1;
      return boost::math::gamma_q(a + 1, (t - h) / 2);
  }
  return 0;
}

double paraboloid_height(const ModelParams& model, double u, double A, double t) {
  const int D = model.spatial_dim();
  const auto w = k_region_terms(model, A, t);
  double total = 0;
  for (double x : w) total += x;
  if (!(total > 0)) return model.kind() == ModelKind::kBeta ? 0.0 : t;
  auto cdf = [&](double h) {
    double s = 0;
    for (int i = 0; i <= D; ++i) s += w[i] * k_component_cdf(model, D, i, t, h);
    return s / total;
  };
  double lo = 0, hi = t;
  if (model.kind() != ModelKind::kBeta) {
    double step = std::max(1.0, std::fabs(t));
    lo = t - step;
    while (cdf(lo) > u) {
      step *= 2;
      lo = t - step;
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < u)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Vec uniform_in_ball(Rng& rng, int D, double radius) {
  Vec v(D);
  double n2 = 0;
  while (n2 == 0) {
    for (int j = 0; j < D; ++j) v[j] = rng.standard_normal();
    n2 = v.norm2();
  }
  const double scale = radius * std::pow(rng.uniform_open(), 1.0 / D) / std::sqrt(n2);
  for (int j = 0; j < D; ++j) v[j] *= scale;
  return v;
}

}  // namespace

double kappa(int k) { return std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1); }

double intensity_constant(const ModelParams& model) {
  const double d = model.d();
  const double b = model.beta();
  switch (model.kind()) {
    case ModelKind::kBeta:
      return std::exp(std::lgamma(d / 2 + b + 1) - std::lgamma(b + 1) - d / 2 * std::log(M_PI));
    case ModelKind::kBetaPrime:
      return std::exp(std::lgamma(b) - std::lgamma(b - d / 2) - d / 2 * std::log(M_PI));
    case ModelKind::kGaussian:
      return std::pow(2 * M_PI, -d / 2);
  }
  return 0;
}

double height_density(const ModelParams& model, double h) {
  const double c = intensity_constant(model);
  switch (model.kind()) {
    case ModelKind::kBeta:
      return h < 0 ? 0.0 : c * std::pow(h, model.beta());
    case ModelKind::kBetaPrime:
      return h >= 0 ? 0.0 : c * std::pow(-h, -model.beta());
    case ModelKind::kGaussian:
      return c * std::exp(h / 2);
  }
  return 0;
}

double height_mass(const ModelParams& model, double lo, double hi) {
  const double c = intensity_constant(model);
  const double b = model.beta();
  switch (model.kind()) {
    case ModelKind::kBeta: {
      lo = std::max(lo, 0.0);
      if (!(hi > lo)) return 0;
      if (std::isinf(hi)) return kInf;
      return c / (b + 1) * (std::pow(hi, b + 1) - std::pow(lo, b + 1));
    }
    case ModelKind::kBetaPrime: {
      hi = std::min(hi, 0.0);
      if (!(hi > lo)) return 0;
      if (hi == 0) return kInf;
      const double s_lo = -hi;
      const double tail = std::isinf(lo) ? 0.0 : std::pow(-lo, 1 - b);
      return c / (b - 1) * (std::pow(s_lo, 1 - b) - tail);
    }
    case ModelKind::kGaussian: {
      if (!(hi > lo)) return 0;
      if (std::isinf(hi)) return kInf;
      return 2 * c * (std::exp(hi / 2) - std::exp(lo / 2));
    }
  }
  return 0;
}

double expected_count(const ModelParams& model, const SamplingWindow& window) {
  validate_window(model, window);
  if (const auto* par = std::get_if<ParaboloidRegion>(&window.spatial))
    return k_region_mean(model, par->radius, window.height_hi);
  const double mass = height_mass(model, window.height_lo, window.height_hi);
  if (mass == 0) return 0;
  if (std::isinf(mass)) throw DivergenceError("window has infinite intensity mass");
  return spatial_volume(model.spatial_dim(), window) * mass;
}

double k_region_mean(const ModelParams& model, double A, double t) {
  double s = 0;
  for (double x : k_region_terms(model, A, t)) s += x;
  return s;
}

double sample_height(const ModelParams& model, double u, const SamplingWindow& window) {
  if (!(u > 0 && u < 1)) throw DomainError("sample_height requires u in (0, 1)");
  validate_window(model, window);
  if (const auto* par = std::get_if<ParaboloidRegion>(&window.spatial))
    return paraboloid_height(model, u, par->radius, window.height_hi);
  const double lo = window.height_lo;
  const double hi = window.height_hi;
  if (lo == hi) return lo;
  switch (model.kind()) {
    case ModelKind::kBeta: {
      const double b = model.beta() + 1;
      return hi * std::pow(u + (1 - u) * std::pow(lo / hi, b), 1 / b);
    }
    case ModelKind::kBetaPrime: {
      // s = -h has density s^{-beta} on [-hi, -lo]; large u gives small s.
      const double e = 1 - model.beta();
      const double s_lo = -hi;
      const double ratio = std::isinf(lo) ? 0.0 : std::pow(-lo / s_lo, e);
      return -s_lo * std::pow(u + (1 - u) * ratio, 1 / e);
    }
    case ModelKind::kGaussian:
      return hi + 2 * std::log(u + (1 - u) * std::exp((lo - hi) / 2));
  }
  return 0;
}

PointSample sample_process(const ModelParams& model, const SamplingWindow& window,
                           std::uint64_t seed) {
  PointSample out;
  out.model = model;
  out.window = window;
  out.seed = seed;
  const double mean = expected_count(model, window);
  Rng rng(seed);
  const std::uint64_t n = rng.poisson(mean);
  const int D = model.spatial_dim();
  out.points.reserve(n);

  if (const auto* par = std::get_if<ParaboloidRegion>(&window.spatial)) {
    const double A = par->radius;
    const double t = window.height_hi;
    const auto w = k_region_terms(model, A, t);
    std::vector<double> cum(w.size());
    double acc = 0;
    for (std::size_t i = 0; i < w.size(); ++i) cum[i] = acc += w[i];
    for (std::uint64_t k = 0; k < n; ++k) {
      const double pick = rng.uniform_open() * acc;
      const int i = static_cast<int>(std::upper_bound(cum.begin(), cum.end() - 1, pick) - cum.begin());
      double h = k_component_height(model, D, i, t, rng.uniform_open());
      h = std::min(h, t);
      const double radius = A + std::sqrt(t - h);
      out.points.push_back({uniform_in_ball(rng, D, radius), h});
    }
    return out;
  }

  for (std::uint64_t k = 0; k < n; ++k) {
    SpacePoint p;
    if (const auto* b = std::get_if<BallRegion>(&window.spatial)) {
      p.v = uniform_in_ball(rng, D, b->radius);
    } else {
      const auto& box = std::get<BoxRegion>(window.spatial);
      p.v = Vec(D);
      for (int j = 0; j < D; ++j) p.v[j] = rng.uniform(box.lo[j], box.hi[j]);
    }
    p.h = sample_height(model, rng.uniform_open(), window);
    out.points.push_back(p);
  }
  return out;
}

double sup_tail_bound(const ModelParams& model, double A, double T) {
  if (!(A > 0)) throw DomainError("tail bounds require A > 0");
  const int D = model.spatial_dim();
  const double ck = intensity_constant(model) * kappa(D);
  const double AD = std::pow(A, D);
  switch (model.kind()) {
    case ModelKind::kBeta: {
      if (T <= 4 * A * A) return 1.0;
      const double b = model.beta();
      return std::exp(-ck / (b + 1) * AD * std::pow(T - 4 * A * A, b + 1));
    }
    case ModelKind::kBetaPrime: {
      if (T >= 0) return 0.0;
      const double b = model.beta();
      return std::exp(-ck / (b - 1) * AD * std::pow(4 * A * A - T, 1 - b));
    }
    case ModelKind::kGaussian:
      return std::exp(-2 * ck * AD * std::exp(T / 2 - 2 * A * A));
  }
  return 1.0;
}

double inf_tail_bound(const ModelParams& model, double A, double t) {
  if (!(A > 0)) throw DomainError("tail bounds require A > 0");
  const double d = model.d();
  const double D = model.spatial_dim();
  const double b = model.beta();
  switch (model.kind()) {
    case ModelKind::kBeta: {
      if (t <= 0) return 0.0;
      const double k = std::exp(std::lgamma(d / 2 + b + 1) - std::lgamma((d + 1) / 2));
      return -std::expm1(-k * std::pow(t, b + 1) * std::pow(A + std::sqrt(t), D));
    }
    case ModelKind::kBetaPrime: {
      if (t >= 0) return 1.0;
      const double g = std::max(std::tgamma(b - (d + 1) / 2), std::tgamma(b - 1));
      const double k = g / std::tgamma(b - d / 2);
      const double s = -t;
      return -std::expm1(-k * std::pow(s, 1 - b) * std::pow(A + std::sqrt(s), D));
    }
    case ModelKind::kGaussian:
      return -std::expm1(-2 / std::sqrt(M_PI) * std::pow(A + 1, D) * std::exp(t / 2));
  }
  return 1.0;
}

double inf_tail_probability(const ModelParams& model, double A, double t) {
  if (model.kind() == ModelKind::kBetaPrime && t >= 0) return 1.0;
  return -std::expm1(-k_region_mean(model, A, t));
}

double height_cutoff_for_budget(const ModelParams& model, double A, double budget,
                                double max_height) {
  if (!(budget > 0 && budget < 1)) throw DomainError("height budget must lie in (0, 1)");
  if (!(A > 0)) throw DomainError("height cutoff requires A > 0");
  if (model.kind() == ModelKind::kBetaPrime)
    throw DomainError("beta_prime model: the envelope never reaches 0, no upper height cutoff");
  // Bisection on x = T - 4A^2, where the bound is monotone decreasing.
  const double base = 4 * A * A;
  auto bound = [&](double x) { return sup_tail_bound(model, A, base + x); };
  double lo = model.kind() == ModelKind::kBeta ? 0.0 : -1.0;
  double hi = 1.0;
  while (bound(lo) <= budget) lo = 2 * lo - 1;  // Gaussian only; the beta bound is 1 at 0
  while (bound(hi) > budget) {
    if (base + hi > max_height) {
      throw InfeasibleError("height cutoff exceeds the cap " + std::to_string(max_height),
                            bound(max_height - base));
    }
    hi *= 2;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (bound(mid) > budget)
      lo = mid;
    else
      hi = mid;
  }
  const double T = base + 0.5 * (lo + hi);
  if (T > max_height)
    throw InfeasibleError("height cutoff exceeds the cap " + std::to_string(max_height),
                          bound(max_height - base));
  return T;
}

Truncation choose_truncation(const ModelParams& model, double R, double delta,
                             const TruncationOptions& options) {
  if (!(R > 0)) throw DomainError("choose_truncation requires R > 0");
  if (!(delta > 0 && delta < 1)) throw DomainError("choose_truncation requires delta in (0, 1)");
  if (!(options.height_share > 0 && options.height_share < 1))
    throw DomainError("height_share must lie in (0, 1)");
  Truncation out;
  out.height_budget = options.height_share * delta;
  out.margin_budget = delta - out.height_budget;
  const double dm = out.margin_budget;
  const double keep = 1 - options.height_share;

  double r = 0;
  switch (model.kind()) {
    case ModelKind::kBeta: {
      const double p = model.d() + 1 + 2 * model.beta();
      auto shape = [p](double x) { return x * std::exp(-std::pow(x, p)); };
      double lo = std::max(1.0 / 3, std::pow(p, -1 / p));
      if (shape(lo) <= dm) {
        r = lo;
        break;
      }
      double hi = 2 * lo;
      while (shape(hi) > dm) {
        if (hi > options.max_margin)
          throw InfeasibleError("stabilization margin exceeds the cap",
                                shape(options.max_margin) / keep);
        hi *= 2;
      }
      while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (shape(mid) > dm ? lo : hi) = mid;
      }
      r = 0.5 * (lo + hi);
      break;
    }
    case ModelKind::kGaussian:
      r = std::max(1.0 / 3, std::sqrt(-std::log(dm)));
      break;
    case ModelKind::kBetaPrime: {
      const double q = 2 * model.beta() - model.d() - 1;
      r = std::pow(dm, -1 / q);
      if (r > options.max_margin)
        throw InfeasibleError("stabilization margin exceeds the cap",
                              std::pow(options.max_margin, -q) / keep);
      break;
    }
  }
  out.margin = r;
  const double A = R + r;

  switch (model.kind()) {
    case ModelKind::kBeta:
      out.window = ball_window(A, 0, height_cutoff_for_budget(model, A, out.height_budget,
                                                              options.max_height));
      break;
    case ModelKind::kGaussian:
      out.window = ball_window(A, -kInf, height_cutoff_for_budget(model, A, out.height_budget,
                                                                  options.max_height));
      break;
    case ModelKind::kBetaPrime:
      out.epsilon = options.initial_epsilon;
      out.window = ball_window(A, -kInf, -options.initial_epsilon);
      break;
  }
  return out;
}

}  // namespace bdt
