#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/special_functions/airy.hpp>

#include "airy.hpp"
#include "error.hpp"
#include "quadrature.hpp"

using namespace asep;

TEST_CASE("Ai and Ai' against Boost") {
  double worst = 0.0;
  for (double x = -20.0; x <= 30.0; x += 0.0625) {
    const AiryValue v = airy(x);
    const double ai = boost::math::airy_ai(x), dai = boost::math::airy_ai_prime(x);
    // Relative error away from zeros, absolute scale near them.
    const double scale_ai = std::max(std::abs(ai), 1e-3 * std::exp(-std::max(x, 0.0) * 1.0));
    const double scale_dai = std::max(std::abs(dai), 1e-3 * std::exp(-std::max(x, 0.0) * 1.0));
    worst = std::max({worst, std::abs(v.ai - ai) / scale_ai, std::abs(v.ai_prime - dai) / scale_dai});
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("values at zero") {
  const AiryValue v = airy(0.0);
  CHECK(v.ai == doctest::Approx(0.355028053887817239).epsilon(1e-15));
  CHECK(v.ai_prime == doctest::Approx(-0.258819403792806798).epsilon(1e-15));
}

TEST_CASE("Airy equation residual") {
  // Ai'' = x Ai, checked by a centered difference of Ai'.
  const double h = 1e-4;
  for (double x : {-15.0, -9.0, -7.9, -3.0, 0.5, 4.0, 8.1, 12.0}) {
    const double second = (airy(x + h).ai_prime - airy(x - h).ai_prime) / (2 * h);
    const double ai = airy(x).ai;
    CHECK(std::abs(second - x * ai) < 1e-6 * std::max(1.0, std::abs(x * ai)) + 1e-12);
  }
}

TEST_CASE("continuity across the method switch") {
  for (double x : {-8.0, 8.0}) {
    const AiryValue a = airy(std::nextafter(x, 0.0)), b = airy(std::nextafter(x, 2 * x));
    CHECK(std::abs(a.ai - b.ai) < 1e-12 * std::max(std::abs(a.ai), 1e-8));
    CHECK(std::abs(a.ai_prime - b.ai_prime) < 1e-12 * std::max(std::abs(a.ai_prime), 1e-8));
  }
}

TEST_CASE("tail integrals") {
  const std::vector<double> ys{0.0, -20.0, 30.0, -5.5, 2.25};
  const std::vector<double> tails = airy_tail_integrals(ys);
  CHECK(tails[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(tails[2] < 1e-40);
  // int_{-20}^{inf} Ai = 2/3 + int_0^{20} Ai(-x) dx; compare with a Boost quadrature.
  auto boost_tail = [](double y) {
    const GaussRule g = gauss_legendre(40);
    double sum = 0.0;
    for (double a = y; a < 30.0; a += 0.5)
      for (std::size_t i = 0; i < g.nodes.size(); ++i)
        sum += 0.25 * g.weights[i] * boost::math::airy_ai(a + 0.25 * (g.nodes[i] + 1.0));
    return sum;
  };
  for (std::size_t i : {1u, 3u, 4u}) CHECK(tails[i] == doctest::Approx(boost_tail(ys[i])).epsilon(1e-11));
  CHECK_THROWS_AS(airy(-21.0), Error);
  CHECK_THROWS_AS(airy(31.0), Error);
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n - 1") {
  const GaussRule g = gauss_legendre(7);
  for (int k = 0; k <= 13; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) sum += g.weights[i] * std::pow(g.nodes[i], k);
    CHECK(sum == doctest::Approx(k % 2 ? 0.0 : 2.0 / (k + 1)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(gauss_legendre(0), Error);
}
