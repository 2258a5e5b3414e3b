#include "harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "simulator.hpp"

namespace asep {

namespace {

struct Centering {
  double center;
  double scale;
  double exponent;
};

Centering centering(const ScalingConstants& c, Regime regime) {
  if (regime == Regime::Gaussian) {
    require(c.gaussian_scale.has_value() && *c.gaussian_scale > 0.0, ErrorCode::Domain,
            "Gaussian scale is absent or zero for these parameters");
    return {c.gaussian_center, *c.gaussian_scale, 0.5};
  }
  require(c.scale > 0.0, ErrorCode::Domain, "fluctuation scale vanishes for these parameters");
  return {c.center, c.scale, 1.0 / 3.0};
}

double scaled(double value, double t, const ScalingConstants& c, Regime regime) {
  require(t > 0.0, ErrorCode::Domain, "time must be positive");
  const Centering k = centering(c, regime);
  return (value - k.center * t) / (k.scale * std::pow(t, k.exponent));
}

}  // namespace

double scaled_position_statistic(double position, double t, const ScalingConstants& consts,
                                 Regime regime) {
  require(consts.mode == ScalingMode::Position, ErrorCode::Domain,
          "position statistic needs position-mode constants");
  return scaled(position, t, consts, regime);
}

double scaled_current_statistic(double current, double t, const ScalingConstants& consts,
                                Regime regime) {
  require(consts.mode == ScalingMode::Current, ErrorCode::Domain,
          "current statistic needs current-mode constants");
  return scaled(current, t, consts, regime);
}

KsResult ks_distance(std::span<const double> sorted_samples, const Cdf& cdf) {
  require(!sorted_samples.empty(), ErrorCode::Domain, "KS distance needs samples");
  const double n = static_cast<double>(sorted_samples.size());
  KsResult result;
  for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
    const double f = cdf(sorted_samples[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    result.distance = std::max({result.distance, above, below});
  }
  return result;
}

LawCdf::LawCdf(LimitLaw law, const DistributionTable* table, bool reflected)
    : law_(law), table_(table), reflected_(reflected) {
  if (law != LimitLaw::G)
    require(table != nullptr && table->law == law, ErrorCode::Domain,
            "a table of the requested law is required");
}

double LawCdf::base(double s) const {
  if (law_ == LimitLaw::G) return gaussian_G(s);
  if (s < table_->s_min()) return 0.0;
  if (s > table_->s_max()) return 1.0;
  return table_->value_at(s);
}

double LawCdf::operator()(double s) const { return reflected_ ? 1.0 - base(-s) : base(s); }

bool LawCdf::outside(double s) const {
  if (law_ == LimitLaw::G) return false;
  const double arg = reflected_ ? -s : s;
  return arg < table_->s_min() || arg > table_->s_max();
}

KsResult ks_distance(std::span<const double> sorted_samples, const LawCdf& cdf) {
  KsResult result = ks_distance(sorted_samples, Cdf([&cdf](double s) { return cdf(s); }));
  result.clamped = static_cast<std::size_t>(std::count_if(
      sorted_samples.begin(), sorted_samples.end(), [&cdf](double s) { return cdf.outside(s); }));
  return result;
}

const DistributionTable* LawTables::table_for(LimitLaw law) const {
  switch (law) {
    case LimitLaw::F2: return &f2;
    case LimitLaw::F1sq: return &f1sq;
    case LimitLaw::G: return nullptr;
  }
  return nullptr;
}

LawTables make_law_tables(double step, const LawNumerics& numerics, int threads) {
  return LawTables{make_table(LimitLaw::F2, -10.0, 6.0, step, numerics, threads),
                   make_table(LimitLaw::F1sq, -10.0, 6.0, step, numerics, threads)};
}

LimitLaw target_law(Regime regime) {
  switch (regime) {
    case Regime::TW2: return LimitLaw::F2;
    case Regime::Critical: return LimitLaw::F1sq;
    case Regime::Gaussian: return LimitLaw::G;
  }
  return LimitLaw::F2;
}

void validate_plan(const ExperimentPlan& plan) {
  require(!plan.t_list.empty(), ErrorCode::Domain, "plan needs at least one time");
  require(plan.t_list.front() > 0.0, ErrorCode::Domain, "times must be positive");
  require(std::adjacent_find(plan.t_list.begin(), plan.t_list.end(),
                             [](double a, double b) { return b <= a; }) == plan.t_list.end(),
          ErrorCode::Domain, "times must be strictly increasing");
  require(plan.trials >= 100, ErrorCode::Domain, "at least 100 trials per time");
  require(plan.params.gamma() > 0.0, ErrorCode::Domain, "the gamma clock needs q > p");
  const ScalingConstants consts =
      scaling_constants(plan.sigma_or_v, plan.params.rho(), plan.mode);
  const Regime actual = classify_regime(plan.sigma_or_v, plan.params.rho(), plan.mode);
  if (plan.regime.has_value())
    require(*plan.regime == actual, ErrorCode::Domain,
            "requested regime " + to_string(*plan.regime) + " but parameters give " +
                to_string(actual));
  centering(consts, actual);
}

ConvergenceReport run_convergence(const ExperimentPlan& plan, const LawTables& tables) {
  validate_plan(plan);
  ConvergenceReport report;
  report.plan = plan;
  report.regime = classify_regime(plan.sigma_or_v, plan.params.rho(), plan.mode);
  report.law = target_law(report.regime);
  report.constants = scaling_constants(plan.sigma_or_v, plan.params.rho(), plan.mode);
  const bool current = plan.mode == ScalingMode::Current;

  for (std::size_t ti = 0; ti < plan.t_list.size(); ++ti) {
    const double t = plan.t_list[ti];
    ConvergenceRow row;
    row.t = t;
    row.physical_time = t / plan.params.gamma();
    row.trials = plan.trials;
    row.m_or_x = static_cast<long>(std::ceil(plan.sigma_or_v * t - 1e-9));
    if (!current) require(row.m_or_x >= 1, ErrorCode::Domain, "m = ceil(sigma t) must be >= 1");
    const int margin = truncation_margin(plan.params, row.physical_time);
    const long reach =
        poisson_upper_quantile(plan.params.q() * row.physical_time, 1e-9) + 10;

    std::vector<double> samples(static_cast<std::size_t>(plan.trials));
    parallel_for(samples.size(), plan.threads, [&](std::size_t trial) {
      Rng rng(trial_seed(plan.seed, (static_cast<std::uint64_t>(ti) << 32) | trial));
      const LatticeState initial =
          current ? sample_initial_particles(plan.params.rho(), 0, row.m_or_x + reach, margin, rng)
                  : sample_initial_particles(plan.params.rho(), static_cast<int>(row.m_or_x) + margin,
                                             0, 0, rng);
      const Trajectory traj = evolve(initial, row.physical_time, plan.params, rng);
      samples[trial] =
          current ? scaled_current_statistic(
                        static_cast<double>(observe_current(traj, row.m_or_x, row.physical_time)), t,
                        report.constants, report.regime)
                  : scaled_position_statistic(
                        static_cast<double>(observe_position(traj, static_cast<int>(row.m_or_x),
                                                             row.physical_time)),
                        t, report.constants, report.regime);
    });
    std::sort(samples.begin(), samples.end());

    const double n = static_cast<double>(samples.size());
    row.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double squares = 0.0;
    for (double s : samples) squares += (s - row.mean) * (s - row.mean);
    row.sd = std::sqrt(squares / (n - 1.0));

    auto ks_against = [&](LimitLaw law) {
      return ks_distance(samples, LawCdf(law, tables.table_for(law), current));
    };
    const KsResult f2 = ks_against(LimitLaw::F2);
    const KsResult f1sq = ks_against(LimitLaw::F1sq);
    const KsResult g = ks_against(LimitLaw::G);
    row.ks_f2 = f2.distance;
    row.ks_f1sq = f1sq.distance;
    row.ks_g = g.distance;
    const KsResult& target = report.law == LimitLaw::F2     ? f2
                             : report.law == LimitLaw::F1sq ? f1sq
                                                            : g;
    row.ks = target.distance;
    row.clamped = target.clamped;
    row.samples = std::move(samples);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_report_csv(std::ostream& os, const ConvergenceReport& report) {
  const auto precision = os.precision(17);
  os << "t,trials,ks,mean,sd,regime,law,ks_f2,ks_f1sq,ks_g,m_or_x,physical_time\n";
  for (const ConvergenceRow& r : report.rows) {
    os << r.t << ',' << r.trials << ',' << r.ks << ',' << r.mean << ',' << r.sd << ','
       << to_string(report.regime) << ',' << to_string(report.law) << ',' << r.ks_f2 << ','
       << r.ks_f1sq << ',' << r.ks_g << ',' << r.m_or_x << ',' << r.physical_time << '\n';
  }
  os.precision(precision);
}

}  // namespace asep
