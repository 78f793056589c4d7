#pragma once

// Reference values computed independently of the library: Boost special
// functions and adaptive quadrature of the intensity densities.

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

#include "bdt/model.hpp"

namespace bdt::oracle {

inline double pi() { return boost::math::constants::pi<double>(); }

inline double unit_ball_volume(int k) {
  return std::pow(pi(), k / 2.0) / boost::math::tgamma(k / 2.0 + 1);
}

inline double intensity_constant(const ModelParams& m) {
  using boost::math::tgamma;
  const double d = m.d();
  const double b = m.beta();
  switch (m.kind()) {
    case ModelKind::kBeta:
      return tgamma(d / 2 + b + 1) / (std::pow(pi(), d / 2) * tgamma(b + 1));
    case ModelKind::kBetaPrime:
      return tgamma(b) / (std::pow(pi(), d / 2) * tgamma(b - d / 2));
    case ModelKind::kGaussian:
      break;
  }
  return std::pow(2 * pi(), -d / 2);
}

inline double density(const ModelParams& m, double h) {
  const double c = oracle::intensity_constant(m);
  switch (m.kind()) {
    case ModelKind::kBeta:
      return c * std::pow(h, m.beta());
    case ModelKind::kBetaPrime:
      return c * std::pow(-h, -m.beta());
    case ModelKind::kGaussian:
      break;
  }
  return c * std::exp(h / 2);
}

// Integral over K(A, t) of the intensity, as a one-dimensional integral in
// the depth u = t - h of the cross-section volume kappa (A + sqrt(u))^{d-1}.
inline double k_region_mass(const ModelParams& m, double A, double t) {
  const int D = m.spatial_dim();
  const double kap = unit_ball_volume(D);
  auto f = [&](double u) { return kap * std::pow(A + std::sqrt(u), D) * density(m, t - u); };
  if (m.kind() == ModelKind::kBeta) {
    if (t <= 0) return 0;
    // Integrate in h so that the h^beta endpoint singularity sits at h = 0,
    // where it is evaluated without cancellation.
    auto g = [&](double h) { return kap * std::pow(A + std::sqrt(t - h), D) * density(m, h); };
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(g, 0.0, t, 1e-14);
  }
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

// Height CDF of the intensity restricted to K(A, t), by quadrature.
inline double k_height_cdf(const ModelParams& m, double A, double t, double h) {
  const int D = m.spatial_dim();
  const double kap = unit_ball_volume(D);
  auto f = [&](double x) { return kap * std::pow(A + std::sqrt(t - x), D) * density(m, x); };
  const double total = k_region_mass(m, A, t);
  if (m.kind() == ModelKind::kBeta) {
    boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate(f, 0.0, h, 1e-12) / total;
  }
  boost::math::quadrature::exp_sinh<double> q;
  auto g = [&](double s) { return f(h - s); };
  return q.integrate(g, 0.0, std::numeric_limits<double>::infinity(), 1e-12) / total;
}

}  // namespace bdt::oracle
