#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <gmpxx.h>

#include "combinatorics.hpp"
#include "ctmc.hpp"
#include "error.hpp"
#include "exact_law.hpp"

using namespace asep;

namespace {

double binomial_tail(int m, int x, double rho) {
  double sum = 0.0;
  for (int j = m; j <= x; ++j)
    sum += boost::math::binomial_coefficient<double>(x, j) * std::pow(rho, j) *
           std::pow(1 - rho, x - j);
  return sum;
}

// Kernel of the step initial condition, written out independently.
cplx step_kernel(cplx xi, cplx eta, const ModelParams& par, long x, double t) {
  const double p = par.p(), q = par.q();
  const cplx eps = p / xi + q * xi - 1.0;
  return q * std::pow(xi, x) * std::exp(eps * t) / (p + q * xi * eta - xi);
}

}  // namespace

TEST_CASE("t = 0 reproduces the binomial law of the initial data") {
  Numerics numerics;
  numerics.tol = 1e-8;
  for (double rho : {0.3, 0.7})
    for (int m = 1; m <= 3; ++m)
      for (int x = m; x <= 7; ++x) {
        const ProbabilityResult r = prob_position(m, x, 0.0, ModelParams(0.3, 0.7, rho), numerics);
        CHECK(std::abs(r.probability - binomial_tail(m, x, rho)) < 1e-8);
      }
  CHECK(prob_position(2, 1, 0.0, ModelParams(0.3, 0.7, 0.5)).probability < 1e-8);
}

TEST_CASE("rho = 1 kernel is the step kernel") {
  const ModelParams par(0.3, 0.7, 1.0);
  const KernelSpec spec = make_kernel_spec(par, 2, 1.5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
  for (int i = 0; i < 20; ++i) {
    const cplx a = std::polar(spec.radius, angle(rng)), b = std::polar(spec.radius, angle(rng));
    const cplx ref = step_kernel(a, b, par, 2, 1.5);
    CHECK(std::abs(kernel_K(a, b, spec) - ref) <= 1e-13 * std::abs(ref));
  }
}

TEST_CASE("gamma clock rescales time") {
  const ModelParams par(0.3, 0.7, 0.5);
  const double a = prob_position(2, 1, 2.0, par, {}, TimeClock::GammaScaled).probability;
  const double b = prob_position(2, 1, 2.0 / par.gamma(), par).probability;
  CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("m = 1 equals one minus the Fredholm determinant") {
  // With m = 1 the lambda integrand has poles at 0 and 1 only.
  const ModelParams par(0.3, 0.7, 0.5);
  for (long x : {-3L, 0L, 2L}) {
    const KernelSpec spec = make_kernel_spec(par, x, 1.0);
    const Kernel k = [&](cplx a, cplx b) { return kernel_K(a, b, spec); };
    const FredholmEvaluation det = fredholm_det_converged(k, 0.0, spec.radius, 1.0, 64, 1e-12);
    const double p = prob_position(1, x, 1.0, par).probability;
    CHECK(std::abs(p - (1.0 - det.value.real())) < 1e-9);
  }
}

TEST_CASE("Fredholm probabilities against the exact finite-lattice law") {
  const ModelParams par(0.3, 0.7, 0.5);
  const LatticeWindow lattice{-7, 10};
  const ExactLawTable law = exact_ctmc_law(bernoulli_initial(lattice, 0.5), lattice, 1.0, par);
  for (int m = 1; m <= 2; ++m)
    for (long x = -3; x <= 5; ++x) {
      const double exact = law.prob_position_at_most(m, x);
      CHECK(std::abs(prob_position(m, x, 1.0, par).probability - exact) < 1e-4);
    }
}

TEST_CASE("single particle follows the Skellam law") {
  const ModelParams par(0.3, 0.7, 1.0);
  const double t = 1.3;
  const long y = 2;
  for (long x = -2; x <= 5; ++x) {
    const long d = x - y;
    const double ref = std::exp(-t) * std::pow(par.p() / par.q(), 0.5 * d) *
                       boost::math::cyl_bessel_i(std::abs(d), 2 * t * std::sqrt(par.p() * par.q()));
    const std::vector<long> Y{y};
    CHECK(std::abs(prob_position_finite_Y(Y, 1, x, t, par).probability - ref) < 1e-9);
  }
}

TEST_CASE("finite configurations against the exact finite-lattice law") {
  const ModelParams par(0.4, 0.6, 1.0);
  const double t = 0.8;
  const LatticeWindow lattice{-6, 9};
  for (const std::vector<long>& Y : {std::vector<long>{1, 3}, std::vector<long>{0, 1}}) {
    const ExactLawTable law = exact_ctmc_law(point_mass_initial(lattice, Y), lattice, t, par);
    for (int m = 1; m <= 2; ++m)
      for (long x = -1; x <= 4; ++x) {
        const double exact = law.prob_position_equals(m, x);
        CHECK(std::abs(prob_position_finite_Y(Y, m, x, t, par).probability - exact) < 1e-6);
      }
  }
}

TEST_CASE("Bernoulli averaging closed form against enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(1, 9);
  constexpr long N = 8;
  for (int instance = 0; instance < 30; ++instance) {
    mpq_class rho(num(rng), 10), tau(num(rng), 10);
    rho.canonicalize();
    tau.canonicalize();
    std::vector<long> S;
    for (long s = 1; s <= N; ++s)
      if (rng() % 3 == 0) S.push_back(s);
    if (S.empty()) S.push_back(1 + static_cast<long>(rng() % N));
    mpq_class brute = 0;
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
      std::vector<long> Y;
      for (long s = 1; s <= N; ++s)
        if (mask >> (s - 1) & 1) Y.push_back(s);
      bool contains = true;
      for (long s : S) contains = contains && (mask >> (s - 1) & 1);
      if (!contains) continue;
      mpq_class w = ipow(rho, static_cast<long>(Y.size())) *
                    ipow(mpq_class(1 - rho), N - static_cast<long>(Y.size())) *
                    ipow(tau, static_cast<long>(sigma_count(S, Y)));
      brute += w;
    }
    CHECK(bernoulli_weight_closed_form<mpq_class>(S, rho, tau) == brute);
  }
}

TEST_CASE("quadrature is self-consistent under node doubling") {
  const ModelParams par(0.3, 0.7, 0.5);
  Numerics fine;
  fine.n_xi = 256;
  fine.n_lambda = 256;
  for (long x : {-2L, 1L}) {
    const ProbabilityResult a = prob_position(2, x, 1.5, par);
    const ProbabilityResult b = prob_position(2, x, 1.5, par, fine);
    CHECK(std::abs(a.probability - b.probability) < 1e-9);
    CHECK(a.error_estimate < 1e-9);
  }
}

TEST_CASE("probabilities are monotone in x and in m") {
  const ModelParams par(0.3, 0.7, 0.6);
  double previous = 0.0;
  for (long x = -4; x <= 6; ++x) {
    const double p1 = prob_position(1, x, 1.0, par).probability;
    const double p2 = prob_position(2, x, 1.0, par).probability;
    CHECK(p1 >= previous - 1e-10);
    CHECK(p2 <= p1 + 1e-10);
    previous = p1;
  }
}

TEST_CASE("invalid requests") {
  const ModelParams par(0.3, 0.7, 0.5);
  CHECK_THROWS_AS(prob_position(0, 1, 1.0, par), Error);
  CHECK_THROWS_AS(prob_position(1, 1, -1.0, par), Error);
  CHECK_THROWS_AS(prob_position(1, 1, 1.0, ModelParams(0.5, 0.5, 1.0), {}, TimeClock::GammaScaled),
                  Error);
  CHECK_THROWS_AS(make_kernel_spec(par, 0, 1.0, TimeClock::Raw, 0.9), Error);
  Numerics tight;
  tight.tol = 1e-16;
  tight.n_cap = 64;
  try {
    prob_position(2, 0, 2.0, par, tight);
    FAIL("expected a convergence failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Convergence);
  }
}
