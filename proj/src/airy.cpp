#include "airy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "error.hpp"
#include "quadrature.hpp"

namespace asep {

namespace {

using quad = __float128;

// Ai(0) and -Ai'(0), each split into a leading double and a correction.
const quad kAiZero = static_cast<quad>(0.3550280538878172) + static_cast<quad>(2.05233632436212e-17);
const quad kMinusAiPrimeZero =
    static_cast<quad>(0.2588194037928068) + static_cast<quad>(-2.522243111610832e-17);

quad quad_abs(quad v) { return v < 0 ? -v : v; }

AiryValue maclaurin(double xd) {
  const quad x = xd;
  const quad x3 = x * x * x;
  quad f = 1, g = x, fp = 0, gp = 1;
  quad f_term = 1, g_term = x, fp_term = x * x / 2, gp_term = 1;
  fp = fp_term;
  for (int k = 1; k < 400; ++k) {
    const quad kk = 3 * k;
    f_term *= x3 / ((kk - 1) * kk);
    g_term *= x3 / (kk * (kk + 1));
    gp_term *= x3 / (kk * (kk - 2));
    if (k >= 2) fp_term *= x3 / ((kk - 1) * (kk - 3));
    f += f_term;
    g += g_term;
    gp += gp_term;
    if (k >= 2) fp += fp_term;
    const quad scale = quad_abs(f) + quad_abs(g) + quad_abs(fp) + quad_abs(gp);
    const quad last = quad_abs(f_term) + quad_abs(g_term) + quad_abs(fp_term) + quad_abs(gp_term);
    if (k > 2 && last < static_cast<quad>(1e-34) * scale) break;
  }
  return AiryValue{static_cast<double>(kAiZero * f - kMinusAiPrimeZero * g),
                   static_cast<double>(kAiZero * fp - kMinusAiPrimeZero * gp)};
}

// Coefficients u_k, v_k of the large-argument expansions, truncated at the
// smallest term for the given zeta.
struct AsymptoticSums {
  double u_even = 0.0, u_odd = 0.0, v_even = 0.0, v_odd = 0.0;  // oscillatory side
  double u_alt = 0.0, v_alt = 0.0;                               // decaying side
};

AsymptoticSums asymptotic_sums(double zeta) {
  AsymptoticSums s;
  double u = 1.0, v = 1.0;
  double power = 1.0;  // zeta^{-k}
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
      v = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
      power /= zeta;
    }
    const double size = std::abs(u * power) + std::abs(v * power);
    if (size > previous) break;
    previous = size;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    s.u_alt += sign * u * power;
    s.v_alt += sign * v * power;
    const double pair_sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) {
      s.u_even += pair_sign * u * power;
      s.v_even += pair_sign * v * power;
    } else {
      s.u_odd += pair_sign * u * power;
      s.v_odd += pair_sign * v * power;
    }
    if (size < 1e-17) break;
  }
  return s;
}

AiryValue asymptotic_positive(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  const AsymptoticSums s = asymptotic_sums(zeta);
  const double root4 = std::sqrt(std::sqrt(x));
  const double prefactor = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
  return AiryValue{prefactor / root4 * s.u_alt, -prefactor * root4 * s.v_alt};
}

AiryValue asymptotic_negative(double x) {
  const double z = -x;
  const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
  const AsymptoticSums s = asymptotic_sums(zeta);
  const double root4 = std::sqrt(std::sqrt(z));
  const double phase = zeta - std::numbers::pi / 4.0;
  const double c = std::cos(phase), sn = std::sin(phase);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  return AiryValue{inv_sqrt_pi / root4 * (c * s.u_even + sn * s.u_odd),
                   inv_sqrt_pi * root4 * (sn * s.v_even - c * s.v_odd)};
}

}  // namespace

AiryValue AiryEvaluator::operator()(double x) const {
  require(std::isfinite(x) && x >= min_x && x <= max_x, ErrorCode::Domain,
          "Airy argument outside the supported range");
  if (std::abs(x) <= series_radius) return maclaurin(x);
  return x > 0.0 ? asymptotic_positive(x) : asymptotic_negative(x);
}

AiryValue airy(double x) { return AiryEvaluator{}(x); }

double airy_ai(double x) { return airy(x).ai; }

std::vector<double> airy_tail_integrals(std::span<const double> ys) {
  const AiryEvaluator evaluator;
  for (double y : ys)
    require(std::isfinite(y) && y >= evaluator.min_x && y <= evaluator.max_x, ErrorCode::Domain,
            "tail integral start outside the supported range");
  static const GaussRule rule = gauss_legendre(16);
  constexpr double kMaxPiece = 0.5;

  auto segment = [&](double a, double b) {
    if (b <= a) return 0.0;
    const int pieces = static_cast<int>(std::ceil((b - a) / kMaxPiece));
    const double h = (b - a) / pieces;
    double sum = 0.0;
    for (int piece = 0; piece < pieces; ++piece) {
      const double lo = a + piece * h;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        sum += rule.weights[i] * evaluator(lo + 0.5 * h * (rule.nodes[i] + 1.0)).ai;
    }
    return 0.5 * h * sum;
  };

  std::vector<std::size_t> order(ys.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ys[a] > ys[b]; });
  std::vector<double> out(ys.size());
  // Beyond the upper limit the integral is below 1e-45.
  double upper = evaluator.max_x;
  double accumulated = 0.0;
  for (std::size_t idx : order) {
    accumulated += segment(ys[idx], upper);
    upper = std::min(upper, ys[idx]);
    out[idx] = accumulated;
  }
  return out;
}

}  // namespace asep
