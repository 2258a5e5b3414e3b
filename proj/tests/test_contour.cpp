#include <doctest.h>

#include <cmath>
#include <random>

#include "contour.hpp"
#include "error.hpp"

using namespace asep;

TEST_CASE("trapezoidal circle integrates monomials exactly") {
  const ContourGrid g = make_circle(cplx(0.3, -0.2), 1.7, 32);
  const cplx c = g.center;
  for (int k = -5; k <= 5; ++k) {
    const cplx v = integrate(g, [&](cplx z) { return std::pow(z - c, k); });
    CHECK(std::abs(v - (k == -1 ? cplx(1.0) : cplx(0.0))) < 1e-13);
  }
}

TEST_CASE("residue of a simple pole") {
  const ContourGrid g = make_circle(0.0, 2.0, 128);
  const cplx a(0.5, 0.25);
  const cplx v = integrate(g, [&](cplx z) { return std::exp(z) / (z - a); });
  CHECK(std::abs(v - std::exp(a)) < 1e-12);
}

TEST_CASE("half grid keeps every other node") {
  const ContourGrid g = make_circle(0.0, 1.0, 16);
  const ContourGrid h = half_grid(g);
  REQUIRE(h.size() == 8);
  for (int j = 0; j < 8; ++j) {
    CHECK(h.nodes[j] == g.nodes[2 * j]);
    CHECK(std::abs(h.weights[j] - 2.0 * g.weights[2 * j]) < 1e-15);
  }
  CHECK_THROWS_AS(make_circle(0.0, 1.0, 4), Error);
  CHECK_THROWS_AS(make_circle(0.0, -1.0, 16), Error);
}

TEST_CASE("det(I - lambda M) against Eigen's determinant") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.3);
  CMatrix M(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) M(i, j) = cplx(n(rng), n(rng));
  const FredholmPencil pencil(M);
  for (cplx lambda : {cplx(0.0), cplx(1.0), cplx(-0.7, 2.0), cplx(3.0, -1.0)}) {
    const cplx ref = (CMatrix::Identity(12, 12) - lambda * M).determinant();
    CHECK(std::abs(det_identity_minus(M, lambda) - ref) < 1e-12 * (1 + std::abs(ref)));
    CHECK(std::abs(pencil.det_identity_minus(lambda) - ref) < 1e-11 * (1 + std::abs(ref)));
  }
}

TEST_CASE("Fredholm determinant of a rank-one kernel") {
  // K(z, w) = f(z) g(w) on the unit circle: det(I - lambda K) = 1 - lambda \oint f g.
  const Kernel k = [](cplx z, cplx w) { return std::exp(z) * (1.0 / w + w); };
  const cplx lambda(0.6, 0.1);
  const FredholmEvaluation ev = fredholm_det_converged(k, 0.0, 1.0, lambda, 16, 1e-12);
  CHECK(std::abs(ev.value - (1.0 - lambda)) < 1e-12);
  CHECK(ev.error_estimate < 1e-12);
}

TEST_CASE("singular pencil is reported") {
  CMatrix M = CMatrix::Identity(4, 4);
  CHECK_THROWS_AS(det_identity_minus(M, 1.0), Error);
  try {
    det_identity_minus(M, 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Singular);
  }
}

TEST_CASE("tensor-product contour integral") {
  const ContourGrid g = make_circle(0.0, 1.5, 32);
  const MultiIntegrand f = [](std::span<const cplx> z) {
    return 1.0 / (z[0] * (z[1] - 0.5));
  };
  CHECK(std::abs(contour_integral_multi(f, g, 2) - 1.0) < 1e-12);
}
