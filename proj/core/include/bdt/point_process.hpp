#pragma once

#include <cstdint>
#include <optional>

#include "bdt/model.hpp"

namespace bdt {

// Volume of the unit ball in R^k.
double kappa(int k);

// c_{d,beta} (beta model), c'_{d,beta} (beta-prime model) or (2 pi)^{-d/2}
// (Gaussian model): the factor in front of h^beta, (-h)^{-beta} or e^{h/2}.
double intensity_constant(const ModelParams& model);

// Intensity of the process at height h, per unit spatial volume.
double height_density(const ModelParams& model, double h);

// Integral of height_density over [lo, hi]; infinite when it diverges.
double height_mass(const ModelParams& model, double lo, double hi);

// Mean number of points in the window. Throws DivergenceError for windows of
// infinite mass and DomainError for windows outside the model's support.
double expected_count(const ModelParams& model, const SamplingWindow& window);

// Mean number of points in K(A, t) = {(v, h) : h <= t, |v| <= A + sqrt(t - h)}.
double k_region_mean(const ModelParams& model, double A, double t);

// Inverse CDF of the height marginal on the window: heights have density
// proportional to height_density, and for paraboloid windows additionally
// weighted by the cross-section volume. Monotone increasing in u.
double sample_height(const ModelParams& model, double u, const SamplingWindow& window);

// Poisson realization on the window, deterministic in (model, window, seed).
PointSample sample_process(const ModelParams& model, const SamplingWindow& window,
                           std::uint64_t seed);

// Upper bounds for the probability that the growth envelope over B_A exceeds
// T somewhere, resp. falls below t somewhere.
double sup_tail_bound(const ModelParams& model, double A, double T);
double inf_tail_bound(const ModelParams& model, double A, double t);

// Exact P(inf over B_A of the envelope < t) = 1 - exp(-k_region_mean(A, t)).
double inf_tail_probability(const ModelParams& model, double A, double t);

// Smallest height T with sup_tail_bound(model, A, T) <= budget, by bisection.
// Not defined for the beta-prime model, whose envelope never reaches 0.
double height_cutoff_for_budget(const ModelParams& model, double A, double budget,
                                double max_height = 1e6);

struct TruncationOptions {
  double height_share = 0.5;  // fraction of delta spent on the height cutoff
  double max_margin = 1e4;
  double max_height = 1e6;
  double initial_epsilon = 1.0 / 16;  // beta-prime only
};

struct Truncation {
  SamplingWindow window;
  double margin = 0;
  double height_budget = 0;
  double margin_budget = 0;
  // Beta-prime: upper height cutoff -epsilon, to be validated adaptively.
  std::optional<double> epsilon;
};

// Window B_{R+r} x [heights] such that the envelope tail bound over B_{R+r}
// and the stabilization decay shape r -> r e^{-r^{d+1+2beta}} (beta),
// r^{-(2beta-d-1)} (beta-prime), e^{-r^2} (Gaussian) with unit constants each
// stay within their share of delta. Throws InfeasibleError past the caps.
Truncation choose_truncation(const ModelParams& model, double R, double delta,
                             const TruncationOptions& options = {});

}  // namespace bdt
