#include "asep_lab.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "ctmc.hpp"
#include "error.hpp"
#include "exact_law.hpp"
#include "harness.hpp"
#include "identities.hpp"
#include "limit_laws.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "simulator.hpp"

struct asep_table {
  asep::DistributionTable table;
};

struct asep_sim {
  std::vector<int> m_list;
  std::vector<long> x_list;
  std::vector<long> positions;  // trial-major, n_m per trial
  std::vector<long> currents;   // trial-major, n_x per trial
  std::size_t trials = 0;
};

struct asep_identity_report {
  asep::IdentityReport report;
};

struct asep_convergence {
  asep::ConvergenceReport report;
};

namespace {

thread_local std::string last_error;

asep_status to_status(asep::ErrorCode code) { return static_cast<asep_status>(code); }

template <class F>
asep_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return ASEP_OK;
  } catch (const asep::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return ASEP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return ASEP_ERR_INTERNAL;
  }
}

void require_pointer(const void* ptr, const char* name) {
  if (ptr == nullptr) throw asep::Error(asep::ErrorCode::Domain, std::string(name) + " is null");
}

asep::ModelParams model(const asep_params* params) {
  require_pointer(params, "params");
  return asep::ModelParams(params->p, params->q, params->rho);
}

asep::Numerics numerics_from(const asep_numerics* n) {
  asep::Numerics out;
  if (n == nullptr) return out;
  out.n_xi = n->n_xi;
  out.n_lambda = n->n_lambda;
  out.n_cap = n->n_cap;
  out.tol = n->tol;
  out.imag_tol = n->imag_tol;
  out.range_tol = n->range_tol;
  out.radius = n->radius;
  return out;
}

asep::LawNumerics law_numerics_from(const asep_law_numerics* n) {
  asep::LawNumerics out;
  if (n == nullptr) return out;
  out.n_quad = n->n_quad;
  out.length = n->length;
  out.tol = n->tol;
  return out;
}

asep::LimitLaw law_from(asep_law law) {
  switch (law) {
    case ASEP_LAW_G: return asep::LimitLaw::G;
    case ASEP_LAW_F2: return asep::LimitLaw::F2;
    case ASEP_LAW_F1SQ: return asep::LimitLaw::F1sq;
  }
  throw asep::Error(asep::ErrorCode::Domain, "unknown law");
}

asep_law law_to(asep::LimitLaw law) {
  switch (law) {
    case asep::LimitLaw::G: return ASEP_LAW_G;
    case asep::LimitLaw::F2: return ASEP_LAW_F2;
    case asep::LimitLaw::F1sq: return ASEP_LAW_F1SQ;
  }
  return ASEP_LAW_G;
}

asep::ScalingMode mode_from(asep_mode mode) {
  if (mode == ASEP_MODE_POSITION) return asep::ScalingMode::Position;
  if (mode == ASEP_MODE_CURRENT) return asep::ScalingMode::Current;
  throw asep::Error(asep::ErrorCode::Domain, "unknown scaling mode");
}

asep_regime regime_to(asep::Regime r) {
  switch (r) {
    case asep::Regime::TW2: return ASEP_REGIME_TW2;
    case asep::Regime::Critical: return ASEP_REGIME_CRITICAL;
    case asep::Regime::Gaussian: return ASEP_REGIME_GAUSSIAN;
  }
  return ASEP_REGIME_AUTO;
}

std::optional<asep::Regime> regime_from(asep_regime r) {
  switch (r) {
    case ASEP_REGIME_AUTO: return std::nullopt;
    case ASEP_REGIME_TW2: return asep::Regime::TW2;
    case ASEP_REGIME_CRITICAL: return asep::Regime::Critical;
    case ASEP_REGIME_GAUSSIAN: return asep::Regime::Gaussian;
  }
  throw asep::Error(asep::ErrorCode::Domain, "unknown regime");
}

void fill(const asep::ProbabilityResult& r, asep_prob_result* out) {
  out->probability = r.probability;
  out->raw_real = r.raw_real;
  out->imag_residual = r.imag_residual;
  out->error_estimate = r.error_estimate;
  out->n_xi = r.n_xi;
  out->n_lambda = r.n_lambda;
  out->radius = r.radius;
  out->warning_count = static_cast<int>(r.warnings.size());
}

std::ofstream open_output(const char* path) {
  require_pointer(path, "path");
  std::ofstream os(path);
  if (!os) throw asep::Error(asep::ErrorCode::Domain, std::string("cannot open ") + path);
  return os;
}

asep::ExperimentPlan plan_from(const asep_plan* plan) {
  require_pointer(plan, "plan");
  asep::ExperimentPlan out;
  out.params = model(&plan->params);
  out.mode = mode_from(plan->mode);
  out.regime = regime_from(plan->regime);
  out.sigma_or_v = plan->sigma_or_v;
  if (plan->n_t > 0) require_pointer(plan->t_list, "t_list");
  out.t_list.assign(plan->t_list, plan->t_list + plan->n_t);
  out.trials = plan->trials;
  out.seed = plan->seed;
  out.threads = plan->threads > 0 ? plan->threads : asep::default_thread_count();
  return out;
}

}  // namespace

extern "C" {

const char* asep_version(void) { return "1.0.0"; }

const char* asep_status_name(asep_status status) {
  switch (status) {
    case ASEP_OK: return "ok";
    case ASEP_ERR_DOMAIN: return "domain";
    case ASEP_ERR_CONVERGENCE: return "convergence";
    case ASEP_ERR_CONSISTENCY: return "consistency";
    case ASEP_ERR_SINGULAR: return "singular";
    case ASEP_ERR_WINDOW: return "window-violation";
    case ASEP_ERR_UNSUPPORTED: return "unsupported";
    case ASEP_ERR_RANGE: return "range";
    case ASEP_ERR_PRECISION: return "precision";
    case ASEP_ERR_DEGENERATE: return "degenerate";
    case ASEP_ERR_IDENTITY: return "identity-failure";
    case ASEP_ERR_IO: return "io";
    case ASEP_ERR_NULL: return "null-handle";
    case ASEP_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* asep_last_error(void) { return last_error.c_str(); }

asep_status asep_params_validate(const asep_params* params) {
  return guard([&] { model(params); });
}

asep_status asep_scaling_constants(double sigma_or_v, double rho, asep_mode mode,
                                   asep_scaling* out) {
  return guard([&] {
    require_pointer(out, "out");
    const asep::ScalingConstants c = asep::scaling_constants(sigma_or_v, rho, mode_from(mode));
    out->center = c.center;
    out->scale = c.scale;
    out->gaussian_center = c.gaussian_center;
    out->has_gaussian_scale = c.gaussian_scale.has_value() ? 1 : 0;
    out->gaussian_scale = c.gaussian_scale.value_or(0.0);
  });
}

asep_status asep_classify_regime(double sigma_or_v, double rho, asep_mode mode,
                                 asep_regime* out) {
  return guard([&] {
    require_pointer(out, "out");
    asep::scaling_constants(sigma_or_v, rho, mode_from(mode));
    *out = regime_to(asep::classify_regime(sigma_or_v, rho, mode_from(mode)));
  });
}

const char* asep_regime_name(asep_regime regime) {
  switch (regime) {
    case ASEP_REGIME_AUTO: return "auto";
    case ASEP_REGIME_TW2: return "tw2";
    case ASEP_REGIME_CRITICAL: return "critical";
    case ASEP_REGIME_GAUSSIAN: return "gaussian";
  }
  return "unknown";
}

void asep_numerics_default(asep_numerics* out) {
  if (out == nullptr) return;
  const asep::Numerics n;
  *out = asep_numerics{n.n_xi, n.n_lambda, n.n_cap, n.tol, n.imag_tol, n.range_tol, n.radius};
}

asep_status asep_prob_position(const asep_params* params, int m, long x, double t,
                               int gamma_clock, const asep_numerics* numerics,
                               asep_prob_result* out) {
  return guard([&] {
    require_pointer(out, "out");
    const auto clock = gamma_clock ? asep::TimeClock::GammaScaled : asep::TimeClock::Raw;
    fill(asep::prob_position(m, x, t, model(params), numerics_from(numerics), clock), out);
  });
}

asep_status asep_prob_position_finite_y(const asep_params* params, const long* y, size_t ny,
                                        int m, long x, double t, const asep_numerics* numerics,
                                        asep_prob_result* out) {
  return guard([&] {
    require_pointer(out, "out");
    if (ny > 0) require_pointer(y, "y");
    const std::vector<long> sites(y, y + ny);
    fill(asep::prob_position_finite_Y(sites, m, x, t, model(params), numerics_from(numerics)),
         out);
  });
}

asep_status asep_fredholm_det(const asep_params* params, long x, double t, int gamma_clock,
                              double lambda_re, double lambda_im, int n_nodes, double radius,
                              double* out_re, double* out_im) {
  return guard([&] {
    require_pointer(out_re, "out_re");
    require_pointer(out_im, "out_im");
    const auto clock = gamma_clock ? asep::TimeClock::GammaScaled : asep::TimeClock::Raw;
    const asep::KernelSpec spec = asep::make_kernel_spec(model(params), x, t, clock, radius);
    const asep::Kernel kernel = [&spec](asep::cplx a, asep::cplx b) {
      return asep::kernel_K(a, b, spec);
    };
    const asep::CMatrix M =
        asep::nystrom_matrix(kernel, asep::make_circle(0.0, spec.radius, n_nodes));
    const asep::cplx det = asep::det_identity_minus(M, {lambda_re, lambda_im});
    *out_re = det.real();
    *out_im = det.imag();
  });
}

asep_status asep_ctmc_prob_position(const asep_params* params, long lo, long hi, double t, int m,
                                    long x, double* out) {
  return guard([&] {
    require_pointer(out, "out");
    const asep::ModelParams par = model(params);
    const asep::LatticeWindow lattice{lo, hi};
    const asep::ExactLawTable table =
        asep::exact_ctmc_law(asep::bernoulli_initial(lattice, par.rho()), lattice, t, par);
    *out = table.prob_position_at_most(m, x);
  });
}

void asep_law_numerics_default(asep_law_numerics* out) {
  if (out == nullptr) return;
  const asep::LawNumerics n;
  *out = asep_law_numerics{n.n_quad, n.length, n.tol};
}

const char* asep_law_name(asep_law law) {
  switch (law) {
    case ASEP_LAW_G: return "G";
    case ASEP_LAW_F2: return "F2";
    case ASEP_LAW_F1SQ: return "F1sq";
  }
  return "unknown";
}

asep_status asep_airy(double x, double* ai, double* ai_prime) {
  return guard([&] {
    const asep::AiryValue v = asep::airy(x);
    if (ai) *ai = v.ai;
    if (ai_prime) *ai_prime = v.ai_prime;
  });
}

asep_status asep_law_value(asep_law law, double s, const asep_law_numerics* numerics,
                           double* value, double* error_estimate) {
  return guard([&] {
    require_pointer(value, "value");
    const asep::LawEvaluation ev = asep::evaluate_law(law_from(law), s, law_numerics_from(numerics));
    *value = ev.value;
    if (error_estimate) *error_estimate = ev.error_estimate;
  });
}

asep_status asep_f1sq_lemma(double s, const asep_law_numerics* numerics, double* value) {
  return guard([&] {
    require_pointer(value, "value");
    *value = asep::tracy_widom_F1sq_lemma(s, law_numerics_from(numerics)).value;
  });
}

asep_status asep_table_create(asep_law law, double s_min, double s_max, double step,
                              const asep_law_numerics* numerics, int threads, asep_table** out) {
  return guard([&] {
    require_pointer(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<asep_table>();
    handle->table = asep::make_table(law_from(law), s_min, s_max, step, law_numerics_from(numerics),
                                     threads > 0 ? threads : asep::default_thread_count());
    *out = handle.release();
  });
}

size_t asep_table_size(const asep_table* table) {
  return table == nullptr ? 0 : table->table.grid.size();
}

asep_status asep_table_point(const asep_table* table, size_t i, double* s, double* value,
                             double* error_estimate) {
  if (table == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    if (i >= table->table.grid.size())
      throw asep::Error(asep::ErrorCode::Range, "table index out of range");
    if (s) *s = table->table.grid[i];
    if (value) *value = table->table.values[i];
    if (error_estimate) *error_estimate = table->table.errors[i];
  });
}

asep_status asep_table_value_at(const asep_table* table, double s, double* value) {
  if (table == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    require_pointer(value, "value");
    *value = table->table.value_at(s);
  });
}

asep_status asep_table_quantile(const asep_table* table, double p, double* s) {
  if (table == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    require_pointer(s, "s");
    *s = asep::quantile(table->table, p);
  });
}

asep_status asep_table_write_csv(const asep_table* table, const char* path) {
  if (table == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    std::ofstream os = open_output(path);
    asep::write_table_csv(os, table->table);
    if (!os) throw asep::Error(asep::ErrorCode::Domain, "write failed");
  });
}

void asep_table_free(asep_table* table) { delete table; }

asep_status asep_simulate(const asep_sim_request* request, asep_sim** out) {
  return guard([&] {
    require_pointer(request, "request");
    require_pointer(out, "out");
    *out = nullptr;
    const asep::ModelParams par = model(&request->params);
    if (request->trials < 1) throw asep::Error(asep::ErrorCode::Domain, "trials must be >= 1");
    if (!(request->t >= 0.0)) throw asep::Error(asep::ErrorCode::Domain, "time must be >= 0");
    if (request->n_m > 0) require_pointer(request->m_list, "m_list");
    if (request->n_x > 0) require_pointer(request->x_list, "x_list");
    auto sim = std::make_unique<asep_sim>();
    sim->m_list.assign(request->m_list, request->m_list + request->n_m);
    sim->x_list.assign(request->x_list, request->x_list + request->n_x);
    for (int m : sim->m_list)
      if (m < 1) throw asep::Error(asep::ErrorCode::Domain, "particle labels must be >= 1");
    sim->trials = static_cast<std::size_t>(request->trials);

    const int margin =
        request->margin >= 0 ? request->margin : asep::truncation_margin(par, request->t);
    const int max_m = sim->m_list.empty()
                          ? 0
                          : *std::max_element(sim->m_list.begin(), sim->m_list.end());
    long last_site = 0;
    if (!sim->x_list.empty())
      last_site = *std::max_element(sim->x_list.begin(), sim->x_list.end()) +
                  asep::poisson_upper_quantile(par.q() * request->t, 1e-9) + 10;
    sim->positions.resize(sim->trials * sim->m_list.size());
    sim->currents.resize(sim->trials * sim->x_list.size());
    const int threads = request->threads > 0 ? request->threads : asep::default_thread_count();
    asep::parallel_for(sim->trials, threads, [&](std::size_t trial) {
      asep::Rng rng(asep::trial_seed(request->seed, trial));
      const asep::LatticeState initial =
          asep::sample_initial_particles(par.rho(), max_m + margin, last_site, margin, rng);
      const asep::Trajectory traj = asep::evolve(initial, request->t, par, rng);
      for (std::size_t i = 0; i < sim->m_list.size(); ++i)
        sim->positions[trial * sim->m_list.size() + i] =
            asep::observe_position(traj, sim->m_list[i], request->t);
      for (std::size_t i = 0; i < sim->x_list.size(); ++i)
        sim->currents[trial * sim->x_list.size() + i] =
            asep::observe_current(traj, sim->x_list[i], request->t);
    });
    *out = sim.release();
  });
}

size_t asep_sim_trials(const asep_sim* sim) { return sim == nullptr ? 0 : sim->trials; }

asep_status asep_sim_position(const asep_sim* sim, size_t trial, size_t m_index, long* out) {
  if (sim == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    require_pointer(out, "out");
    if (trial >= sim->trials || m_index >= sim->m_list.size())
      throw asep::Error(asep::ErrorCode::Range, "simulation index out of range");
    *out = sim->positions[trial * sim->m_list.size() + m_index];
  });
}

asep_status asep_sim_current(const asep_sim* sim, size_t trial, size_t x_index, long* out) {
  if (sim == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    require_pointer(out, "out");
    if (trial >= sim->trials || x_index >= sim->x_list.size())
      throw asep::Error(asep::ErrorCode::Range, "simulation index out of range");
    *out = sim->currents[trial * sim->x_list.size() + x_index];
  });
}

uint64_t asep_sim_duality_violations(const asep_sim* sim, uint64_t* pairs_checked) {
  if (sim == nullptr) return 0;
  std::uint64_t violations = 0, checked = 0;
  const std::size_t nm = sim->m_list.size(), nx = sim->x_list.size();
  for (std::size_t trial = 0; trial < sim->trials; ++trial)
    for (std::size_t i = 0; i < nm; ++i)
      for (std::size_t j = 0; j < nx; ++j) {
        const bool current_side = sim->currents[trial * nx + j] >= sim->m_list[i];
        const bool position_side = sim->positions[trial * nm + i] <= sim->x_list[j];
        if (current_side != position_side) ++violations;
        ++checked;
      }
  if (pairs_checked) *pairs_checked = checked;
  return violations;
}

asep_status asep_sim_write_cdf_csv(const asep_sim* sim, int kind, size_t index, const char* path) {
  if (sim == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    const bool position = kind == 0;
    if (kind != 0 && kind != 1) throw asep::Error(asep::ErrorCode::Domain, "kind must be 0 or 1");
    const std::size_t width = position ? sim->m_list.size() : sim->x_list.size();
    if (index >= width) throw asep::Error(asep::ErrorCode::Range, "observable index out of range");
    const std::vector<long>& data = position ? sim->positions : sim->currents;
    std::map<long, std::size_t> counts;
    for (std::size_t trial = 0; trial < sim->trials; ++trial) ++counts[data[trial * width + index]];
    std::ofstream os = open_output(path);
    os.precision(17);
    os << "value,count,cum_prob\n";
    std::size_t cumulative = 0;
    for (const auto& [value, count] : counts) {
      cumulative += count;
      os << value << ',' << count << ','
         << static_cast<double>(cumulative) / static_cast<double>(sim->trials) << '\n';
    }
  });
}

void asep_sim_free(asep_sim* sim) { delete sim; }

asep_status asep_write_trajectory(const asep_params* params, int particles, double t_end,
                                  int snapshots, uint64_t seed, const char* path) {
  return guard([&] {
    const asep::ModelParams par = model(params);
    if (particles < 1 || snapshots < 1 || !(t_end >= 0.0))
      throw asep::Error(asep::ErrorCode::Domain,
                        "need particles >= 1, snapshots >= 1 and t_end >= 0");
    asep::Rng rng(asep::trial_seed(seed, 0));
    asep::LatticeState state = asep::sample_initial_particles(par.rho(), particles, 0, 0, rng);
    state = asep::finite_state(state.sites);
    asep::EvolveOptions options;
    for (int i = 0; i < snapshots; ++i)
      options.snapshot_times.push_back(snapshots == 1 ? t_end : t_end * i / (snapshots - 1));
    const asep::Trajectory traj = asep::evolve(state, t_end, par, rng, options);
    std::ofstream os = open_output(path);
    os.precision(17);
    for (const asep::Snapshot& s : traj.snapshots) {
      os << s.time;
      for (long site : s.sites) os << ' ' << site;
      os << '\n';
    }
  });
}

asep_status asep_verify_identities(int k_max, int points_per_k, uint64_t seed, int perturb_tau,
                                   asep_identity_report** out) {
  return guard([&] {
    require_pointer(out, "out");
    *out = nullptr;
    auto handle = std::make_unique<asep_identity_report>();
    handle->report = asep::run_identity_suite(k_max, points_per_k, seed, perturb_tau != 0);
    *out = handle.release();
  });
}

size_t asep_identity_case_count(const asep_identity_report* report) {
  return report == nullptr ? 0 : report->report.cases.size();
}

asep_status asep_identity_case(const asep_identity_report* report, size_t i, const char** identity,
                               int* k, int* point, int* passed, int* retries) {
  if (report == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    if (i >= report->report.cases.size())
      throw asep::Error(asep::ErrorCode::Range, "case index out of range");
    const asep::IdentityCase& c = report->report.cases[i];
    if (identity) *identity = c.identity.c_str();
    if (k) *k = c.k;
    if (point) *point = c.point;
    if (passed) *passed = c.passed ? 1 : 0;
    if (retries) *retries = c.retries;
  });
}

int asep_identity_failures(const asep_identity_report* report) {
  return report == nullptr ? -1 : report->report.failures;
}

int asep_identity_negative_control(const asep_identity_report* report) {
  return report != nullptr && report->report.negative_control_detected ? 1 : 0;
}

void asep_identity_report_free(asep_identity_report* report) { delete report; }

asep_status asep_validate_plan(const asep_plan* plan) {
  return guard([&] { asep::validate_plan(plan_from(plan)); });
}

asep_status asep_run_convergence(const asep_plan* plan, asep_convergence** out) {
  return guard([&] {
    require_pointer(out, "out");
    *out = nullptr;
    const asep::ExperimentPlan p = plan_from(plan);
    asep::validate_plan(p);
    const asep::LawTables tables = asep::make_law_tables(0.05, {}, p.threads);
    auto handle = std::make_unique<asep_convergence>();
    handle->report = asep::run_convergence(p, tables);
    *out = handle.release();
  });
}

size_t asep_convergence_rows(const asep_convergence* report) {
  return report == nullptr ? 0 : report->report.rows.size();
}

asep_status asep_convergence_row_at(const asep_convergence* report, size_t i,
                                    asep_convergence_row* out) {
  if (report == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    require_pointer(out, "out");
    if (i >= report->report.rows.size())
      throw asep::Error(asep::ErrorCode::Range, "row index out of range");
    const asep::ConvergenceRow& r = report->report.rows[i];
    *out = asep_convergence_row{r.t,    r.physical_time, r.m_or_x,  r.trials,
                                r.ks,   r.mean,          r.sd,      r.ks_f2,
                                r.ks_f1sq, r.ks_g,       r.clamped};
  });
}

asep_regime asep_convergence_regime(const asep_convergence* report) {
  return report == nullptr ? ASEP_REGIME_AUTO : regime_to(report->report.regime);
}

asep_law asep_convergence_law(const asep_convergence* report) {
  return report == nullptr ? ASEP_LAW_G : law_to(report->report.law);
}

asep_status asep_convergence_write_csv(const asep_convergence* report, const char* path) {
  if (report == nullptr) return ASEP_ERR_NULL;
  return guard([&] {
    std::ofstream os = open_output(path);
    asep::write_report_csv(os, report->report);
  });
}

void asep_convergence_free(asep_convergence* report) { delete report; }

}  // extern "C"
