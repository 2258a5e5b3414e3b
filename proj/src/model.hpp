#pragma once

#include <optional>
#include <string>

namespace asep {

/// Hop rates and initial density of ASEP with step Bernoulli initial data.
///
/// Rates are normalized so that p + q = 1. The ratio tau = p/q and the
/// asymmetry gamma = q - p are derived on demand and never stored.
class ModelParams {
 public:
  /// Throws Error(Domain) unless p >= 0, q > 0, p + q = 1 (to 1e-12) and
  /// 0 < rho <= 1.
  ModelParams(double p, double q, double rho);

  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  double rho() const noexcept { return rho_; }
  double tau() const noexcept { return p_ / q_; }
  double gamma() const noexcept { return q_ - p_; }

  /// Same rates, different density.
  ModelParams with_rho(double rho) const { return ModelParams(p_, q_, rho); }

 private:
  double p_;
  double q_;
  double rho_;
};

enum class ScalingMode { Position, Current };

enum class Regime { TW2, Critical, Gaussian };

std::string to_string(Regime r);
std::string to_string(ScalingMode m);

/// Centering/scaling constants for the fluctuation limits.
///
/// Position mode (argument sigma = m/t):
///   center = c1, scale = c2, gaussian_center = c1', gaussian_scale = c2'.
/// Current mode (argument v = x/t):
///   center = a1, scale = a2, gaussian_center = a1', gaussian_scale = a2'.
/// gaussian_scale is absent where its radicand is negative.
struct ScalingConstants {
  ScalingMode mode;
  double argument;
  double rho;
  double center;
  double scale;
  double gaussian_center;
  std::optional<double> gaussian_scale;
};

ScalingConstants scaling_constants(double sigma_or_v, double rho, ScalingMode mode);

/// Regime boundary: rho^2 in position mode, 2 rho - 1 in current mode.
double regime_boundary(double rho, ScalingMode mode);

Regime classify_regime(double sigma_or_v, double rho, ScalingMode mode);

}  // namespace asep
