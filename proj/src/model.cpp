#include "model.hpp"

#include <cmath>
#include <sstream>

#include "error.hpp"

namespace asep {

namespace {

constexpr double kNormalizationTol = 1e-12;
constexpr double kBoundaryTol = 1e-12;

std::string describe(double p, double q, double rho) {
  std::ostringstream os;
  os.precision(17);
  os << "(p=" << p << ", q=" << q << ", rho=" << rho << ")";
  return os.str();
}

}  // namespace

ModelParams::ModelParams(double p, double q, double rho) : p_(p), q_(q), rho_(rho) {
  require(std::isfinite(p) && std::isfinite(q) && std::isfinite(rho), ErrorCode::Domain,
          "non-finite model parameters " + describe(p, q, rho));
  require(p >= 0.0, ErrorCode::Domain, "p must be >= 0 " + describe(p, q, rho));
  require(q > 0.0, ErrorCode::Domain, "q must be > 0 " + describe(p, q, rho));
  require(std::abs(p + q - 1.0) <= kNormalizationTol, ErrorCode::Domain,
          "rates must satisfy p + q = 1 " + describe(p, q, rho));
  require(rho > 0.0 && rho <= 1.0, ErrorCode::Domain,
          "rho must lie in (0, 1] " + describe(p, q, rho));
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::TW2: return "tw2";
    case Regime::Critical: return "critical";
    case Regime::Gaussian: return "gaussian";
  }
  return "unknown";
}

std::string to_string(ScalingMode m) {
  return m == ScalingMode::Position ? "position" : "current";
}

ScalingConstants scaling_constants(double sigma_or_v, double rho, ScalingMode mode) {
  require(rho > 0.0 && rho <= 1.0, ErrorCode::Domain, "rho must lie in (0, 1]");
  ScalingConstants c{};
  c.mode = mode;
  c.argument = sigma_or_v;
  c.rho = rho;
  if (mode == ScalingMode::Position) {
    const double sigma = sigma_or_v;
    require(sigma > 0.0, ErrorCode::Domain, "sigma must be positive");
    const double root = std::sqrt(sigma);
    const double gap = 1.0 - root;
    c.center = -1.0 + 2.0 * root;
    // (1 - sqrt(sigma))^{2/3} taken as the real cube root of the square.
    c.scale = std::pow(sigma, -1.0 / 6.0) * std::cbrt(gap * gap);
    c.gaussian_center = sigma / rho + rho - 1.0;
    const double radicand = (1.0 - rho) * (sigma - rho * rho);
    if (radicand >= 0.0) c.gaussian_scale = std::sqrt(radicand) / rho;
  } else {
    const double v = sigma_or_v;
    require(v > -1.0, ErrorCode::Domain, "v must exceed -1");
    const double w = 1.0 - v * v;
    c.center = (1.0 + v) * (1.0 + v) / 4.0;
    c.scale = std::pow(2.0, -4.0 / 3.0) * std::cbrt(w * w);
    c.gaussian_center = rho * v + rho * (1.0 - rho);
    const double radicand = rho * (1.0 - rho) * (v + 1.0 - 2.0 * rho);
    if (radicand >= 0.0) c.gaussian_scale = std::sqrt(radicand);
  }
  return c;
}

double regime_boundary(double rho, ScalingMode mode) {
  return mode == ScalingMode::Position ? rho * rho : 2.0 * rho - 1.0;
}

Regime classify_regime(double sigma_or_v, double rho, ScalingMode mode) {
  if (rho >= 1.0) return Regime::TW2;
  const double boundary = regime_boundary(rho, mode);
  const double tol = kBoundaryTol * std::max(1.0, std::abs(boundary));
  if (std::abs(sigma_or_v - boundary) <= tol) return Regime::Critical;
  return sigma_or_v < boundary ? Regime::TW2 : Regime::Gaussian;
}

}  // namespace asep
