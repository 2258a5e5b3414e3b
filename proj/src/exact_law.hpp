#pragma once

#include <span>
#include <string>
#include <vector>

#include "contour.hpp"
#include "model.hpp"

namespace asep {

/// Raw uses the physical time t in the kernel; GammaScaled substitutes t/gamma
/// (the clock in which the fluctuation limits are stated).
enum class TimeClock { Raw, GammaScaled };

struct KernelSpec {
  ModelParams params;
  long x = 0;
  double t = 0.0;
  TimeClock clock = TimeClock::Raw;
  double radius = 0.0;

  /// Time that actually enters exp(epsilon(xi) * T).
  double kernel_time() const;
};

/// 1.05 * max(1, (1 + sqrt(1 + 4pq)) / (2q), |1 - rho(1 - tau)|).
double default_contour_radius(const ModelParams& params);

/// Ring ratio targeted by adaptive_contour_radius, the extra kernel growth
/// exp((epsilon(R) - epsilon(R_default)) T) it is allowed to spend, and the
/// allowed growth (R / R_default)^x of the power factor.
inline constexpr double kFastRatio = 0.75;
inline constexpr double kGrowthBudget = 10.0;
inline constexpr double kPowerBudget = 2.0;

/// Largest radius in [default, R_fast] whose extra growth of e^{epsilon T} and of
/// xi^x (x > 0 only) stays within kGrowthBudget and kPowerBudget, where R_fast puts
/// the poles of 1/(p + q xi xi' - xi) at kFastRatio * R. Larger radii make the
/// trapezoidal rule converge faster.
double adaptive_contour_radius(const ModelParams& params, double kernel_time, long x = 0);

/// Validates R > 1, q R^2 > R + p and R > |1 - rho(1 - tau)|.
KernelSpec make_kernel_spec(const ModelParams& params, long x, double t,
                            TimeClock clock = TimeClock::Raw, double radius = 0.0);

/// p / xi + q xi - 1.
cplx epsilon(cplx xi, const ModelParams& params);

cplx kernel_K(cplx xi, cplx xi_p, const KernelSpec& spec);

struct Numerics {
  int n_xi = 64;
  int n_lambda = 0;  // 0 selects max(128, 16 m)
  int n_cap = 1024;
  double tol = 1e-9;
  double imag_tol = 1e-8;
  double range_tol = 1e-8;
  double radius = 0.0;  // 0 selects adaptive_contour_radius
};

struct ProbabilityResult {
  double probability = 0.0;  // clamped to [0, 1]
  double raw_real = 0.0;
  double imag_residual = 0.0;
  double error_estimate = 0.0;
  int n_xi = 0;
  int n_lambda = 0;
  double radius = 0.0;
  std::vector<std::string> warnings;
};

/// Times above this value trigger a conditioning warning.
inline constexpr double kDirectTimeLimit = 30.0;

/// P(x_m(t) <= x) for step Bernoulli initial data, via the lambda-contour
/// integral of det(I - lambda K) / (lambda prod_{k<m}(1 - lambda tau^k)).
ProbabilityResult prob_position(int m, long x, double t, const ModelParams& params,
                                const Numerics& numerics = {},
                                TimeClock clock = TimeClock::Raw);

/// Radius of the lambda contour: 2 tau^{-(m-1)}, at least 2.
double lambda_contour_radius(int m, const ModelParams& params);

/// P_Y(x_m(t) = x) for a deterministic finite initial configuration Y
/// (|Y| <= 3) via the finite sum over subsets S of Y.
ProbabilityResult prob_position_finite_Y(std::span<const long> Y, int m, long x, double t,
                                         const ModelParams& params,
                                         const Numerics& numerics = {});

/// Integrand I(S, xi) of the finite-configuration formula.
cplx finite_y_integrand(std::span<const cplx> xi, std::span<const long> S, long x, double t,
                        const ModelParams& params);

}  // namespace asep
