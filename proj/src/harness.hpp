#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "limit_laws.hpp"
#include "model.hpp"

namespace asep {

/// (x_m - c1 t)/(c2 t^{1/3}) in the TW2 and Critical regimes,
/// (x_m - c1' t)/(c2' t^{1/2}) in the Gaussian regime. t is the gamma clock.
/// Error(Domain) when the required scale is absent or zero, or t <= 0.
double scaled_position_statistic(double position, double t, const ScalingConstants& consts,
                                 Regime regime);

/// Same with (a1, a2) or (a1', a2') for the current T(x, t).
double scaled_current_statistic(double current, double t, const ScalingConstants& consts,
                                Regime regime);

using Cdf = std::function<double(double)>;

struct KsResult {
  double distance = 0.0;
  std::size_t clamped = 0;  // samples that fell outside the target's table
};

/// sup |F_emp - F| over sorted samples with the one-sided corrections
/// max(i/n - F(x_i), F(x_i) - (i-1)/n). Error(Domain) if samples is empty.
KsResult ks_distance(std::span<const double> sorted_samples, const Cdf& cdf);

/// Distribution function of a law as seen by the harness. Table-based laws are
/// clamped to 0 and 1 outside the table; `clamped` counts those evaluations.
class LawCdf {
 public:
  LawCdf(LimitLaw law, const DistributionTable* table, bool reflected);

  /// F(s), or 1 - F(-s) when reflected (current-mode targets).
  double operator()(double s) const;
  bool outside(double s) const;

 private:
  double base(double s) const;

  LimitLaw law_;
  const DistributionTable* table_;
  bool reflected_;
};

/// KS distance against a law; `clamped` counts samples outside its table.
KsResult ks_distance(std::span<const double> sorted_samples, const LawCdf& cdf);

/// Tables for F2 and F1sq on [-10, 6] used by the harness.
struct LawTables {
  DistributionTable f2;
  DistributionTable f1sq;

  const DistributionTable* table_for(LimitLaw law) const;
};

LawTables make_law_tables(double step = 0.05, const LawNumerics& numerics = {}, int threads = 1);

LimitLaw target_law(Regime regime);

struct ExperimentPlan {
  ModelParams params{0.0, 1.0, 1.0};
  ScalingMode mode = ScalingMode::Position;
  std::optional<Regime> regime;  // nullopt: classify from sigma_or_v
  double sigma_or_v = 0.25;
  std::vector<double> t_list;    // gamma clock
  int trials = 2000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ConvergenceRow {
  double t = 0.0;
  double physical_time = 0.0;
  long m_or_x = 0;
  int trials = 0;
  double ks = 0.0;  // against the regime's target law
  double mean = 0.0;
  double sd = 0.0;
  double ks_f2 = 0.0;
  double ks_f1sq = 0.0;
  double ks_g = 0.0;
  std::size_t clamped = 0;
  std::vector<double> samples;  // scaled statistics, sorted
};

struct ConvergenceReport {
  ExperimentPlan plan;
  Regime regime = Regime::TW2;
  LimitLaw law = LimitLaw::F2;
  ScalingConstants constants{};
  std::vector<ConvergenceRow> rows;
};

/// Error(Domain) for an invalid plan (times not positive and increasing,
/// trials < 100, regime inconsistent with sigma_or_v and rho). Simulation
/// window violations propagate as Error(WindowViolation).
void validate_plan(const ExperimentPlan& plan);

ConvergenceReport run_convergence(const ExperimentPlan& plan, const LawTables& tables);

/// CSV `t,trials,ks,mean,sd,regime,law` followed by the extra columns
/// ks_f2,ks_f1sq,ks_g,m_or_x,physical_time.
void write_report_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace asep
