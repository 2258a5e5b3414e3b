#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "error.hpp"
#include "harness.hpp"

using namespace asep;

namespace {

// sup over x of |F_emp(x) - F(x)|, evaluating F_emp on both sides of each jump.
double ks_oracle(std::vector<double> xs, const Cdf& F) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (double x : xs) {
    const double at = static_cast<double>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const double before = static_cast<double>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
    d = std::max({d, std::abs(at / n - F(x)), std::abs(before / n - F(x))});
  }
  return d;
}

const LawTables& coarse_tables() {
  static const LawTables tables = make_law_tables(0.25);
  return tables;
}

}  // namespace

TEST_CASE("KS distance of exact quantiles is 1/(2n)") {
  constexpr int n = 50;
  const DistributionTable g = make_table(LimitLaw::G, -5.0, 5.0, 0.01);
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) {
    const double target = (i + 0.5) / n;
    double lo = -10, hi = 10;
    for (int k = 0; k < 100; ++k) ((gaussian_G(0.5 * (lo + hi)) < target) ? lo : hi) = 0.5 * (lo + hi);
    xs.push_back(0.5 * (lo + hi));
  }
  CHECK(ks_distance(xs, Cdf(gaussian_G)).distance == doctest::Approx(0.5 / n).epsilon(1e-9));
  (void)g;
}

TEST_CASE("KS distance against a brute-force supremum, with ties") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.3, 1.2);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xs;
    for (int i = 0; i < 40; ++i) xs.push_back(std::round(normal(rng) * 2.0) / 2.0);
    const double oracle = ks_oracle(xs, gaussian_G);
    std::sort(xs.begin(), xs.end());
    CHECK(ks_distance(xs, Cdf(gaussian_G)).distance == doctest::Approx(oracle).epsilon(1e-14));
  }
  const std::vector<double> tied(8, 0.0);
  CHECK(ks_distance(tied, Cdf(gaussian_G)).distance == doctest::Approx(0.5));
}

TEST_CASE("KS distance is bounded and invariant under monotone maps") {
  const std::vector<double> far{40.0, 41.0, 42.0};
  const double d = ks_distance(far, Cdf(gaussian_G)).distance;
  CHECK(d <= 1.0);
  CHECK(d > 0.99);
  std::vector<double> xs{-1.2, -0.3, 0.1, 0.4, 2.0};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(std::exp(x));
  const Cdf transformed = [](double y) { return gaussian_G(std::log(y)); };
  CHECK(ks_distance(ys, transformed).distance ==
        doctest::Approx(ks_distance(xs, Cdf(gaussian_G)).distance).epsilon(1e-14));
  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, Cdf(gaussian_G)), Error);
}

TEST_CASE("law CDFs clamp outside the table and reflect for currents") {
  const LawTables& t = coarse_tables();
  const LawCdf f2(LimitLaw::F2, &t.f2, false);
  CHECK(f2(-20.0) == 0.0);
  CHECK(f2(20.0) == 1.0);
  CHECK(f2.outside(7.0));
  CHECK_FALSE(f2.outside(0.0));
  const LawCdf reflected(LimitLaw::F2, &t.f2, true);
  CHECK(reflected(1.5) == doctest::Approx(1.0 - f2(-1.5)));
  const LawCdf g(LimitLaw::G, nullptr, true);
  CHECK(g(0.7) == doctest::Approx(gaussian_G(0.7)));
  CHECK_THROWS_AS(LawCdf(LimitLaw::F1sq, &t.f2, false), Error);
  const std::vector<double> xs{-11.0, 0.0, 7.0};
  CHECK(ks_distance(xs, f2).clamped == 2);
}

TEST_CASE("scaled statistics") {
  const ScalingConstants c = scaling_constants(0.25, 1.0, ScalingMode::Position);
  const double t = 8.0;
  const double x = c.center * t + 2.0 * c.scale * std::cbrt(t);
  CHECK(scaled_position_statistic(x, t, c, Regime::TW2) == doctest::Approx(2.0));
  const ScalingConstants g = scaling_constants(0.5, 0.5, ScalingMode::Position);
  const double y = g.gaussian_center * t - 1.5 * *g.gaussian_scale * std::sqrt(t);
  CHECK(scaled_position_statistic(y, t, g, Regime::Gaussian) == doctest::Approx(-1.5));
  CHECK_THROWS_AS(scaled_position_statistic(0.0, t, c, Regime::Gaussian), Error);
  CHECK_THROWS_AS(scaled_current_statistic(0.0, t, c, Regime::TW2), Error);
  CHECK_THROWS_AS(scaled_position_statistic(0.0, 0.0, c, Regime::TW2), Error);
}

TEST_CASE("plan validation") {
  ExperimentPlan plan;
  plan.t_list = {10.0, 20.0};
  plan.trials = 100;
  CHECK_NOTHROW(validate_plan(plan));
  auto rejects = [](ExperimentPlan p) {
    try {
      validate_plan(p);
    } catch (const Error& e) {
      return e.code() == ErrorCode::Domain;
    }
    return false;
  };
  ExperimentPlan p = plan;
  p.t_list = {20.0, 10.0};
  CHECK(rejects(p));
  p = plan;
  p.t_list = {};
  CHECK(rejects(p));
  p = plan;
  p.trials = 50;
  CHECK(rejects(p));
  p = plan;
  p.regime = Regime::Gaussian;
  CHECK(rejects(p));
  p = plan;
  p.sigma_or_v = -0.2;
  CHECK(rejects(p));
  p = plan;
  p.params = ModelParams(0.5, 0.5, 1.0);
  CHECK(rejects(p));
  p = plan;
  p.params = ModelParams(0.0, 1.0, 0.5);
  p.sigma_or_v = 0.25;
  p.regime = Regime::Critical;
  CHECK_NOTHROW(validate_plan(p));
  CHECK(target_law(Regime::Critical) == LimitLaw::F1sq);
}

TEST_CASE("small convergence run is reproducible") {
  ExperimentPlan plan;
  plan.t_list = {20.0, 40.0};
  plan.trials = 200;
  plan.seed = 12;
  const ConvergenceReport a = run_convergence(plan, coarse_tables());
  const ConvergenceReport b = run_convergence(plan, coarse_tables());
  REQUIRE(a.rows.size() == 2);
  CHECK(a.regime == Regime::TW2);
  CHECK(a.law == LimitLaw::F2);
  CHECK(a.rows[0].m_or_x == 5);
  CHECK(a.rows[1].m_or_x == 10);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.rows[i].samples == b.rows[i].samples);
    CHECK(a.rows[i].ks == a.rows[i].ks_f2);
    CHECK(a.rows[i].ks > 0.0);
    CHECK(a.rows[i].ks < 1.0);
    CHECK(std::is_sorted(a.rows[i].samples.begin(), a.rows[i].samples.end()));
  }
  std::ostringstream os;
  write_report_csv(os, a);
  CHECK(os.str().rfind("t,trials,ks,mean,sd,regime,law,", 0) == 0);
  CHECK(os.str().find(",tw2,F2,") != std::string::npos);
}

TEST_CASE("current mode uses the dual statistic") {
  ExperimentPlan plan;
  plan.mode = ScalingMode::Current;
  plan.params = ModelParams(0.0, 1.0, 0.5);
  plan.sigma_or_v = 0.0;
  plan.t_list = {30.0};
  plan.trials = 150;
  const ConvergenceReport r = run_convergence(plan, coarse_tables());
  CHECK(r.regime == Regime::Critical);
  CHECK(r.law == LimitLaw::F1sq);
  CHECK(r.rows[0].m_or_x == 0);
}
