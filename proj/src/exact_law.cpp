#include "exact_law.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "combinatorics.hpp"
#include "error.hpp"

namespace asep {

namespace {

struct LambdaSums {
  cplx full;
  cplx xi_half;
  cplx lambda_half;
};

cplx lambda_denominator(cplx lambda, int m, double tau) {
  cplx d = lambda;
  double power = 1.0;
  for (int k = 0; k < m; ++k) {
    d *= 1.0 - lambda * power;
    power *= tau;
  }
  return d;
}

// Trapezoidal lambda integral with both the full and the half-resolution
// xi matrix, plus the every-other-node lambda sum.
LambdaSums lambda_integral(const FredholmPencil& M, const FredholmPencil& H,
                           const ContourGrid& lambda_grid, int m, double tau) {
  LambdaSums s{};
  for (int j = 0; j < lambda_grid.size(); ++j) {
    const cplx lambda = lambda_grid.nodes[j];
    const cplx w = lambda_grid.weights[j] / lambda_denominator(lambda, m, tau);
    const cplx full = w * M.det_identity_minus(lambda);
    s.full += full;
    s.xi_half += w * H.det_identity_minus(lambda);
    if (j % 2 == 0) s.lambda_half += 2.0 * full;
  }
  return s;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double KernelSpec::kernel_time() const {
  return clock == TimeClock::Raw ? t : t / params.gamma();
}

double default_contour_radius(const ModelParams& params) {
  const double p = params.p(), q = params.q();
  const double quadratic_root = (1.0 + std::sqrt(1.0 + 4.0 * p * q)) / (2.0 * q);
  const double pole = std::abs(1.0 - params.rho() * (1.0 - params.tau()));
  return 1.05 * std::max({1.0, quadratic_root, pole});
}

double adaptive_contour_radius(const ModelParams& params, double kernel_time, long x) {
  const double p = params.p(), q = params.q();
  const double base = default_contour_radius(params);
  // Radius at which the pair-pole ring sits at kFastRatio * R.
  const double fast =
      (1.0 + std::sqrt(1.0 + 4.0 * kFastRatio * p * q)) / (2.0 * kFastRatio * q);
  if (fast <= base) return base;
  auto real_epsilon = [&](double r) { return p / r + q * r - 1.0; };
  const double power = static_cast<double>(std::max(x, 0L));
  auto within_budget = [&](double r) {
    return (real_epsilon(r) - real_epsilon(base)) * kernel_time <= std::log(kGrowthBudget) &&
           power * std::log(r / base) <= std::log(kPowerBudget);
  };
  if (within_budget(fast)) return fast;
  double lo = base, hi = fast;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (within_budget(mid) ? lo : hi) = mid;
  }
  return lo;
}

KernelSpec make_kernel_spec(const ModelParams& params, long x, double t, TimeClock clock,
                            double radius) {
  require(t >= 0.0 && std::isfinite(t), ErrorCode::Domain, "time must be nonnegative");
  if (clock == TimeClock::GammaScaled)
    require(params.gamma() > 0.0, ErrorCode::Domain, "gamma clock requires p < q");
  const double R = radius > 0.0 ? radius : default_contour_radius(params);
  const double p = params.p(), q = params.q();
  require(R > 1.0, ErrorCode::Domain, "contour radius must exceed 1");
  require(q * R * R > R + p, ErrorCode::Domain, "contour radius must satisfy qR^2 > R + p");
  require(R > std::abs(1.0 - params.rho() * (1.0 - params.tau())), ErrorCode::Domain,
          "contour must enclose the density pole");
  return KernelSpec{params, x, t, clock, R};
}

cplx epsilon(cplx xi, const ModelParams& params) {
  require(xi != cplx{0.0, 0.0}, ErrorCode::Domain, "epsilon is singular at 0");
  return params.p() / xi + params.q() * xi - 1.0;
}

cplx kernel_K(cplx xi, cplx xi_p, const KernelSpec& spec) {
  const ModelParams& par = spec.params;
  const double p = par.p(), q = par.q(), rho = par.rho(), tau = par.tau();
  const cplx pair_den = p + q * xi * xi_p - xi;
  const cplx pole_den = xi - 1.0 + rho * (1.0 - tau);
  if (pair_den == cplx{0.0, 0.0} || pole_den == cplx{0.0, 0.0})
    fail(ErrorCode::Singular, "kernel denominator vanishes");
  const cplx growth = ipow(xi, spec.x) * std::exp(epsilon(xi, par) * spec.kernel_time());
  return q * growth / pair_den * (rho * (xi - tau) / pole_den);
}

double lambda_contour_radius(int m, const ModelParams& params) {
  const double tau = params.tau();
  const double largest_pole = std::pow(tau, -(m - 1));
  return std::max(2.0, 2.0 * largest_pole);
}

ProbabilityResult prob_position(int m, long x, double t, const ModelParams& params,
                                const Numerics& numerics, TimeClock clock) {
  require(m >= 1, ErrorCode::Domain, "particle index must be >= 1");
  require(params.p() > 0.0, ErrorCode::Domain, "the Fredholm formula requires p != 0");
  const double kernel_time = clock == TimeClock::Raw ? t : t / params.gamma();
  const double radius =
      numerics.radius > 0.0 ? numerics.radius : adaptive_contour_radius(params, kernel_time, x);
  const KernelSpec spec = make_kernel_spec(params, x, t, clock, radius);
  ProbabilityResult result;
  result.radius = spec.radius;
  if (spec.kernel_time() > kDirectTimeLimit) {
    result.warnings.push_back("kernel time " + format_double(spec.kernel_time()) +
                              " exceeds " + format_double(kDirectTimeLimit) +
                              "; double-precision conditioning degrades");
  }

  const Kernel kernel = [&spec](cplx a, cplx b) { return kernel_K(a, b, spec); };
  const double tau = params.tau();
  const double lambda_radius = lambda_contour_radius(m, params);
  int n_xi = numerics.n_xi;
  int n_lambda = numerics.n_lambda > 0 ? numerics.n_lambda : std::max(128, 16 * m);

  while (true) {
    const ContourGrid grid = make_circle(0.0, spec.radius, n_xi);
    const CMatrix M = nystrom_matrix(kernel, grid);
    const int h = n_xi / 2;
    CMatrix H(h, h);
    for (int j = 0; j < h; ++j)
      for (int k = 0; k < h; ++k) H(j, k) = 2.0 * M(2 * j, 2 * k);

    const FredholmPencil full_pencil(M), half_pencil(H);
    const LambdaSums sums = lambda_integral(full_pencil, half_pencil,
                                            make_circle(0.0, lambda_radius, n_lambda), m, tau);
    const double err_xi = std::abs(sums.full - sums.xi_half);
    const double err_lambda = std::abs(sums.full - sums.lambda_half);
    const bool xi_ok = err_xi < numerics.tol / 2;
    const bool lambda_ok = err_lambda < numerics.tol / 2;
    if (xi_ok && lambda_ok) {
      result.raw_real = sums.full.real();
      result.imag_residual = std::abs(sums.full.imag());
      result.error_estimate = err_xi + err_lambda;
      result.n_xi = n_xi;
      result.n_lambda = n_lambda;
      break;
    }
    if ((!xi_ok && 2 * n_xi > numerics.n_cap) || (!lambda_ok && 2 * n_lambda > numerics.n_cap)) {
      fail(ErrorCode::Convergence,
           "prob_position: quadrature unconverged at node cap (xi error " +
               format_double(err_xi) + ", lambda error " + format_double(err_lambda) + ")");
    }
    if (!xi_ok) n_xi *= 2;
    if (!lambda_ok) n_lambda *= 2;
  }

  if (result.imag_residual > numerics.imag_tol)
    fail(ErrorCode::Consistency,
         "prob_position: imaginary part " + format_double(result.imag_residual) + " too large");
  if (result.raw_real < -numerics.range_tol || result.raw_real > 1.0 + numerics.range_tol)
    fail(ErrorCode::Consistency,
         "prob_position: value " + format_double(result.raw_real) + " outside [0, 1]");
  result.probability = std::clamp(result.raw_real, 0.0, 1.0);
  return result;
}

cplx finite_y_integrand(std::span<const cplx> xi, std::span<const long> S, long x, double t,
                        const ModelParams& params) {
  const double p = params.p(), q = params.q();
  const std::size_t k = xi.size();
  cplx value{1.0, 0.0};
  cplx product{1.0, 0.0};
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j)
      value *= (xi[j] - xi[i]) / (p + q * xi[i] * xi[j] - xi[i]);
    product *= xi[i];
    value *= ipow(xi[i], x - 1 - S[i]) * std::exp(epsilon(xi[i], params) * t) / (1.0 - xi[i]);
  }
  return value * (1.0 - product);
}

ProbabilityResult prob_position_finite_Y(std::span<const long> Y, int m, long x, double t,
                                         const ModelParams& params, const Numerics& numerics) {
  require(!Y.empty(), ErrorCode::Domain, "Y must be nonempty");
  require(Y.size() <= 3, ErrorCode::Unsupported, "finite-Y series limited to |Y| <= 3");
  require(std::is_sorted(Y.begin(), Y.end()) &&
              std::adjacent_find(Y.begin(), Y.end()) == Y.end(),
          ErrorCode::Domain, "Y must be strictly increasing");
  require(m >= 1 && m <= static_cast<int>(Y.size()), ErrorCode::Domain,
          "particle index must satisfy 1 <= m <= |Y|");
  require(params.p() > 0.0, ErrorCode::Domain, "the finite-Y series requires p != 0");
  require(t >= 0.0, ErrorCode::Domain, "time must be nonnegative");

  const double R = default_contour_radius(params.with_rho(1.0));
  const int size = static_cast<int>(Y.size());
  const double p = params.p(), q = params.q(), tau = params.tau();

  auto evaluate = [&](const ContourGrid& grid) {
    cplx total{0.0, 0.0};
    for (unsigned mask = 1; mask < (1u << size); ++mask) {
      std::vector<long> S;
      for (int i = 0; i < size; ++i)
        if (mask & (1u << i)) S.push_back(Y[static_cast<std::size_t>(i)]);
      const int k = static_cast<int>(S.size());
      const double coefficient = c_mk<double>(m, k, p, q);
      if (coefficient == 0.0) continue;
      const double weight = ipow(tau, static_cast<long>(sigma_count(S, Y)));
      const MultiIntegrand f = [&](std::span<const cplx> xi) {
        return finite_y_integrand(xi, S, x, t, params);
      };
      total += coefficient * weight * contour_integral_multi(f, grid, k);
    }
    return total;
  };

  ProbabilityResult result;
  for (int n = 32;; n *= 2) {
    const ContourGrid grid = make_circle(0.0, R, n);
    const cplx full = evaluate(grid);
    const double err = std::abs(full - evaluate(half_grid(grid)));
    if (err < numerics.tol || 2 * n > numerics.n_cap || (size == 3 && 2 * n > 256)) {
      if (err >= numerics.tol)
        fail(ErrorCode::Convergence, "finite-Y series unconverged at node cap (error " +
                                         format_double(err) + ")");
      result.raw_real = full.real();
      result.imag_residual = std::abs(full.imag());
      result.error_estimate = err;
      result.n_xi = n;
      break;
    }
  }
  if (result.imag_residual > numerics.imag_tol)
    fail(ErrorCode::Consistency, "finite-Y series: imaginary part too large");
  if (result.raw_real < -numerics.range_tol || result.raw_real > 1.0 + numerics.range_tol)
    fail(ErrorCode::Consistency, "finite-Y series: value outside [0, 1]");
  result.probability = std::clamp(result.raw_real, 0.0, 1.0);
  return result;
}

}  // namespace asep
