#include "bdt/model.hpp"

#include <cmath>
#include <sstream>

#include "bdt/error.hpp"

namespace bdt {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kBeta:
      return "beta";
    case ModelKind::kBetaPrime:
      return "beta_prime";
    case ModelKind::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "beta") return ModelKind::kBeta;
  if (name == "beta_prime") return ModelKind::kBetaPrime;
  if (name == "gaussian") return ModelKind::kGaussian;
  throw DomainError("unknown model kind '" + name +
                    "' (expected beta, beta_prime or gaussian)");
}

namespace {

void check_dimension(int d) {
  if (d < 2 || d > kMaxModelDim) {
    throw DomainError("dimension d = " + std::to_string(d) + " outside supported range 2 <= d <= " +
                      std::to_string(kMaxModelDim));
  }
}

}  // namespace

ModelParams ModelParams::beta(int d, double beta) {
  check_dimension(d);
  if (!(beta > -1.0) || !std::isfinite(beta)) {
    std::ostringstream os;
    os << "beta model requires β > −1 (got " << beta << ")";
    throw DomainError(os.str());
  }
  return ModelParams(ModelKind::kBeta, d, beta);
}

ModelParams ModelParams::beta_prime(int d, double beta) {
  check_dimension(d);
  const double lo = (d + 1) / 2.0;
  if (!(beta > lo) || !std::isfinite(beta)) {
    std::ostringstream os;
    os << "beta_prime model requires β > (d+1)/2 = " << lo << " (got " << beta << ")";
    throw DomainError(os.str());
  }
  return ModelParams(ModelKind::kBetaPrime, d, beta);
}

ModelParams ModelParams::gaussian(int d) {
  check_dimension(d);
  return ModelParams(ModelKind::kGaussian, d, 0.0);
}

std::string ModelParams::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(d=" << d_;
  if (kind_ != ModelKind::kGaussian) os << ", beta=" << beta_;
  os << ")";
  return os.str();
}

bool SamplingWindow::contains(const SpacePoint& p) const {
  if (p.h < height_lo || p.h > height_hi) return false;
  if (const auto* ball = std::get_if<BallRegion>(&spatial)) {
    return p.v.norm2() <= ball->radius * ball->radius;
  }
  if (const auto* box = std::get_if<BoxRegion>(&spatial)) {
    for (int i = 0; i < p.v.size(); ++i) {
      if (p.v[i] < box->lo[i] || p.v[i] > box->hi[i]) return false;
    }
    return true;
  }
  const auto& par = std::get<ParaboloidRegion>(spatial);
  const double rad = par.radius + std::sqrt(height_hi - p.h);
  return p.v.norm2() <= rad * rad;
}

SamplingWindow ball_window(double radius, double height_lo, double height_hi) {
  return SamplingWindow{BallRegion{radius}, height_lo, height_hi};
}

SamplingWindow box_window(const Vec& lo, const Vec& hi, double height_lo, double height_hi) {
  return SamplingWindow{BoxRegion{lo, hi}, height_lo, height_hi};
}

SamplingWindow paraboloid_window(double radius, double height_lo, double t) {
  return SamplingWindow{ParaboloidRegion{radius}, height_lo, t};
}

void validate_window(const ModelParams& model, const SamplingWindow& w) {
  const int D = model.spatial_dim();
  if (std::isnan(w.height_lo) || std::isnan(w.height_hi) || w.height_lo > w.height_hi) {
    throw DomainError("window requires height_lo <= height_hi");
  }
  if (const auto* ball = std::get_if<BallRegion>(&w.spatial)) {
    if (!(ball->radius > 0) || !std::isfinite(ball->radius))
      throw DomainError("ball window requires a positive finite radius");
  } else if (const auto* box = std::get_if<BoxRegion>(&w.spatial)) {
    if (box->lo.size() != D || box->hi.size() != D)
      throw DomainError("box window dimension does not match d-1");
    for (int i = 0; i < D; ++i) {
      if (!(box->lo[i] <= box->hi[i]) || !std::isfinite(box->lo[i]) || !std::isfinite(box->hi[i]))
        throw DomainError("box window requires lo <= hi in every coordinate");
    }
  } else {
    const auto& par = std::get<ParaboloidRegion>(w.spatial);
    if (!(par.radius > 0) || !std::isfinite(par.radius))
      throw DomainError("paraboloid window requires a positive finite radius");
    if (!std::isfinite(w.height_hi))
      throw DomainError("paraboloid window requires a finite apex height t");
    const double natural_lo =
        model.kind() == ModelKind::kBeta ? 0.0 : -std::numeric_limits<double>::infinity();
    if (w.height_lo != natural_lo)
      throw DomainError("paraboloid window must extend down to the model's lowest height");
  }

  // Windows of infinite intensity mass are reported as divergent.
  switch (model.kind()) {
    case ModelKind::kBeta:
      if (!(w.height_lo >= 0)) throw DomainError("beta model requires height_lo >= 0");
      if (!std::isfinite(w.height_hi))
        throw DivergenceError("beta model: infinite height_hi gives an infinite expected count");
      break;
    case ModelKind::kBetaPrime:
      if (std::isinf(w.height_hi) && w.height_hi < 0)
        throw DomainError("beta_prime model requires a finite height_hi");
      if (!(w.height_hi < 0))
        throw DivergenceError("beta_prime model: height_hi must be < 0, the intensity mass near h = 0 is infinite");
      break;
    case ModelKind::kGaussian:
      if (!std::isfinite(w.height_hi))
        throw DivergenceError("gaussian model: infinite height_hi gives an infinite expected count");
      break;
  }
}

}  // namespace bdt
