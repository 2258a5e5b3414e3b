#include <asep_lab.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNumeric = 2,
  kExitWindow = 3,
  kExitIdentity = 4,
};

int exit_code_for(asep_status status) {
  switch (status) {
    case ASEP_OK: return kExitOk;
    case ASEP_ERR_CONVERGENCE:
    case ASEP_ERR_PRECISION:
    case ASEP_ERR_CONSISTENCY:
    case ASEP_ERR_SINGULAR: return kExitNumeric;
    case ASEP_ERR_WINDOW: return kExitWindow;
    case ASEP_ERR_IDENTITY: return kExitIdentity;
    default: return kExitUsage;
  }
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ASEP_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

/// State shared by all subcommands of one invocation.
struct Run {
  std::vector<std::string> argv;
  std::string out_dir = ".";
  int threads = 0;
  std::string command;
  json settings = json::object();
  json seeds = json::object();
  json outputs = json::array();
  json details = json::object();
  std::vector<std::string> messages;
  std::string started;

  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return fs::path(out_dir) / name;
  }

  int fail(asep_status status, const std::string& context) {
    const std::string message = context + ": " + asep_status_name(status) + ": " + asep_last_error();
    std::cerr << "asep-lab: " << message << '\n';
    messages.push_back(message);
    return exit_code_for(status);
  }

  void write_manifest(int exit_code) const {
    const json manifest = {
        {"command", command},        {"argv", argv},         {"settings", settings},
        {"seeds", seeds},            {"threads", threads},   {"version", asep_version()},
        {"started", started},        {"finished", utc_now()}, {"exit_code", exit_code},
        {"outputs", outputs},        {"details", details},   {"messages", messages},
    };
    std::ofstream os(fs::path(out_dir) / (command + ".manifest.json"));
    os << manifest.dump(2) << '\n';
    if (!os) std::cerr << "asep-lab: cannot write manifest in " << out_dir << '\n';
  }
};

std::ofstream open_csv(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os.precision(17);
  return os;
}

struct ParamFlags {
  double p = 0.0, q = 0.0, rho = 1.0;

  void add(CLI::App* app, bool rates_required, bool rho_required) {
    auto* p_opt = app->add_option("--p", p, "right jump rate");
    auto* q_opt = app->add_option("--q", q, "left jump rate (p + q = 1)");
    auto* rho_opt = app->add_option("--rho", rho, "initial density in (0, 1]");
    if (rates_required) {
      p_opt->required();
      q_opt->required();
    } else {
      q = 1.0;
      p_opt->capture_default_str();
      q_opt->capture_default_str();
    }
    if (rho_required) rho_opt->required();
    else rho_opt->capture_default_str();
  }

  asep_params c() const { return asep_params{p, q, rho}; }
  json to_json() const { return {{"p", p}, {"q", q}, {"rho", rho}}; }
};

struct ExactProbArgs {
  ParamFlags params;
  int m = 1;
  double t = 0.0;
  long x_min = 0, x_max = 0;
  bool gamma_clock = false;
  asep_numerics numerics{};
};

int cmd_exact_prob(Run& run, const ExactProbArgs& a) {
  run.settings = {{"params", a.params.to_json()}, {"m", a.m},          {"t", a.t},
                  {"x_min", a.x_min},             {"x_max", a.x_max},  {"gamma_clock", a.gamma_clock},
                  {"numerics",
                   {{"n_xi", a.numerics.n_xi}, {"n_lambda", a.numerics.n_lambda},
                    {"n_cap", a.numerics.n_cap}, {"tol", a.numerics.tol},
                    {"imag_tol", a.numerics.imag_tol}, {"range_tol", a.numerics.range_tol},
                    {"radius", a.numerics.radius}}}};
  const asep_params params = a.params.c();
  if (asep_status s = asep_params_validate(&params); s != ASEP_OK) return run.fail(s, "parameters");
  if (a.x_min > a.x_max) {
    std::cerr << "asep-lab: --x-min exceeds --x-max\n";
    return kExitUsage;
  }
  std::ofstream os = open_csv(run.output("exact_prob.csv"));
  os << "x,P(x_m(t)<=x),imag_residual,err_estimate\n";
  int code = kExitOk;
  json rows = json::array();
  for (long x = a.x_min; x <= a.x_max; ++x) {
    asep_prob_result r{};
    const asep_status s =
        asep_prob_position(&params, a.m, x, a.t, a.gamma_clock ? 1 : 0, &a.numerics, &r);
    if (s == ASEP_OK) {
      os << x << ',' << r.probability << ',' << r.imag_residual << ',' << r.error_estimate << '\n';
      rows.push_back({{"x", x}, {"n_xi", r.n_xi}, {"n_lambda", r.n_lambda}, {"radius", r.radius},
                      {"warnings", r.warning_count}});
      continue;
    }
    const int row_code = run.fail(s, "x=" + std::to_string(x));
    if (row_code == kExitUsage) return row_code;
    os << x << ",nan,nan,nan\n";
    rows.push_back({{"x", x}, {"status", asep_status_name(s)}});
    code = std::max(code, row_code);
  }
  run.details["rows"] = rows;
  return code;
}

struct SimulateArgs {
  ParamFlags params;
  double t = 0.0;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<int> m_list;
  std::vector<long> x_list;
  int margin = -1;
};

int cmd_simulate(Run& run, const SimulateArgs& a) {
  run.settings = {{"params", a.params.to_json()}, {"t", a.t},           {"trials", a.trials},
                  {"m_list", a.m_list},           {"x_list", a.x_list},
                  {"margin", a.margin}};
  run.seeds = {{"root", a.seed}};
  if (a.m_list.empty() && a.x_list.empty()) {
    std::cerr << "asep-lab: nothing to observe (give --m-list and/or --x-list)\n";
    return kExitUsage;
  }
  const asep_sim_request request{a.params.c(), a.t,           a.trials,         a.seed,
                                 a.m_list.data(), a.m_list.size(), a.x_list.data(), a.x_list.size(),
                                 run.threads, a.margin};
  asep_sim* sim = nullptr;
  if (asep_status s = asep_simulate(&request, &sim); s != ASEP_OK) return run.fail(s, "simulate");
  std::unique_ptr<asep_sim, decltype(&asep_sim_free)> owner(sim, asep_sim_free);

  for (std::size_t i = 0; i < a.m_list.size(); ++i) {
    const fs::path path = run.output("position_m" + std::to_string(a.m_list[i]) + ".csv");
    if (asep_status s = asep_sim_write_cdf_csv(sim, 0, i, path.c_str()); s != ASEP_OK)
      return run.fail(s, "write");
  }
  for (std::size_t i = 0; i < a.x_list.size(); ++i) {
    const fs::path path = run.output("current_x" + std::to_string(a.x_list[i]) + ".csv");
    if (asep_status s = asep_sim_write_cdf_csv(sim, 1, i, path.c_str()); s != ASEP_OK)
      return run.fail(s, "write");
  }
  std::uint64_t pairs = 0;
  const std::uint64_t violations = asep_sim_duality_violations(sim, &pairs);
  run.details = {{"duality_pairs", pairs}, {"duality_violations", violations}};
  return kExitOk;
}

struct LimitDistArgs {
  std::string law;
  double s_min = -10.0, s_max = 6.0, step = 0.05;
  asep_law_numerics numerics{};
};

int cmd_limit_dist(Run& run, const LimitDistArgs& a) {
  run.settings = {{"law", a.law},   {"s_min", a.s_min},  {"s_max", a.s_max},
                  {"step", a.step}, {"n_quad", a.numerics.n_quad},
                  {"length", a.numerics.length}, {"tol", a.numerics.tol}};
  asep_law law;
  if (a.law == "g" || a.law == "G") law = ASEP_LAW_G;
  else if (a.law == "f2" || a.law == "F2") law = ASEP_LAW_F2;
  else if (a.law == "f1sq" || a.law == "F1sq") law = ASEP_LAW_F1SQ;
  else {
    std::cerr << "asep-lab: unknown law '" << a.law << "' (expected g, f2 or f1sq)\n";
    return kExitUsage;
  }
  asep_table* table = nullptr;
  if (asep_status s = asep_table_create(law, a.s_min, a.s_max, a.step, &a.numerics, run.threads,
                                        &table);
      s != ASEP_OK)
    return run.fail(s, "limit-dist");
  std::unique_ptr<asep_table, decltype(&asep_table_free)> owner(table, asep_table_free);
  const fs::path path = run.output("limit_dist.csv");
  if (asep_status s = asep_table_write_csv(table, path.c_str()); s != ASEP_OK)
    return run.fail(s, "write");
  run.details["points"] = asep_table_size(table);
  return kExitOk;
}

struct IdentityArgs {
  int k_max = 5;
  int points_per_k = 20;
  std::uint64_t seed = 1;
  bool perturb_tau = false;
};

int cmd_verify_identities(Run& run, const IdentityArgs& a) {
  run.settings = {{"k_max", a.k_max}, {"points_per_k", a.points_per_k},
                  {"perturb_tau", a.perturb_tau}};
  run.seeds = {{"root", a.seed}};
  asep_identity_report* report = nullptr;
  if (asep_status s = asep_verify_identities(a.k_max, a.points_per_k, a.seed, a.perturb_tau ? 1 : 0,
                                                &report);
      s != ASEP_OK)
    return run.fail(s, "verify-identities");
  std::unique_ptr<asep_identity_report, decltype(&asep_identity_report_free)> owner(
      report, asep_identity_report_free);

  json cases = json::array();
  for (std::size_t i = 0; i < asep_identity_case_count(report); ++i) {
    const char* identity = nullptr;
    int k = 0, point = 0, passed = 0, retries = 0;
    asep_identity_case(report, i, &identity, &k, &point, &passed, &retries);
    cases.push_back({{"identity", identity}, {"k", k}, {"point", point},
                     {"passed", passed != 0}, {"retries", retries}});
  }
  const int failures = asep_identity_failures(report);
  const bool control = asep_identity_negative_control(report) != 0;
  const json out = {{"cases", cases}, {"failures", failures}, {"negative_control_detected", control}};
  std::ofstream os(run.output("identities.json"));
  os << out.dump(2) << '\n';
  run.details = {{"cases", cases.size()}, {"failures", failures},
                 {"negative_control_detected", control}};

  std::cout << cases.size() << " exact checks, " << failures << " failures, negative control "
            << (control ? "detected" : "MISSED") << '\n';
  return failures == 0 && control ? kExitOk : kExitIdentity;
}

struct ConvergeArgs {
  ParamFlags params;
  std::string mode = "position";
  std::string regime = "auto";
  std::optional<double> sigma, v;
  std::vector<double> t_list;
  int trials = 2000;
  std::uint64_t seed = 1;
};

int cmd_converge(Run& run, const ConvergeArgs& a) {
  run.settings = {{"params", a.params.to_json()}, {"mode", a.mode},     {"regime", a.regime},
                  {"t_list", a.t_list},            {"trials", a.trials}};
  run.seeds = {{"root", a.seed}};
  asep_plan plan{};
  plan.params = a.params.c();
  if (a.mode == "position") {
    plan.mode = ASEP_MODE_POSITION;
    if (!a.sigma || a.v) {
      std::cerr << "asep-lab: position mode takes --sigma\n";
      return kExitUsage;
    }
    plan.sigma_or_v = *a.sigma;
    run.settings["sigma"] = *a.sigma;
  } else if (a.mode == "current") {
    plan.mode = ASEP_MODE_CURRENT;
    if (!a.v || a.sigma) {
      std::cerr << "asep-lab: current mode takes --v\n";
      return kExitUsage;
    }
    plan.sigma_or_v = *a.v;
    run.settings["v"] = *a.v;
  } else {
    std::cerr << "asep-lab: unknown mode '" << a.mode << "'\n";
    return kExitUsage;
  }
  if (a.regime == "auto") plan.regime = ASEP_REGIME_AUTO;
  else if (a.regime == "tw2") plan.regime = ASEP_REGIME_TW2;
  else if (a.regime == "critical") plan.regime = ASEP_REGIME_CRITICAL;
  else if (a.regime == "gaussian") plan.regime = ASEP_REGIME_GAUSSIAN;
  else {
    std::cerr << "asep-lab: unknown regime '" << a.regime << "'\n";
    return kExitUsage;
  }
  plan.t_list = a.t_list.data();
  plan.n_t = a.t_list.size();
  plan.trials = a.trials;
  plan.seed = a.seed;
  plan.threads = run.threads;

  if (asep_status s = asep_validate_plan(&plan); s != ASEP_OK) return run.fail(s, "plan");
  asep_convergence* report = nullptr;
  if (asep_status s = asep_run_convergence(&plan, &report); s != ASEP_OK)
    return run.fail(s, "converge");
  std::unique_ptr<asep_convergence, decltype(&asep_convergence_free)> owner(
      report, asep_convergence_free);
  const fs::path path = run.output("converge.csv");
  if (asep_status s = asep_convergence_write_csv(report, path.c_str()); s != ASEP_OK)
    return run.fail(s, "write");
  run.details = {{"regime", asep_regime_name(asep_convergence_regime(report))},
                 {"law", asep_law_name(asep_convergence_law(report))}};
  for (std::size_t i = 0; i < asep_convergence_rows(report); ++i) {
    asep_convergence_row row{};
    asep_convergence_row_at(report, i, &row);
    std::cout << "t=" << row.t << " ks=" << std::setprecision(6) << row.ks
              << " (F2 " << row.ks_f2 << ", F1sq " << row.ks_f1sq << ", G " << row.ks_g << ")\n";
  }
  return kExitOk;
}

struct TrajectoryArgs {
  ParamFlags params;
  int particles = 20;
  double t = 10.0;
  int snapshots = 11;
  std::uint64_t seed = 1;
};

int cmd_trajectory(Run& run, const TrajectoryArgs& a) {
  run.settings = {{"params", a.params.to_json()}, {"particles", a.particles}, {"t", a.t},
                  {"snapshots", a.snapshots}};
  run.seeds = {{"root", a.seed}};
  const asep_params params = a.params.c();
  const fs::path path = run.output("trajectory.txt");
  if (asep_status s = asep_write_trajectory(&params, a.particles, a.t, a.snapshots, a.seed,
                                            path.c_str());
      s != ASEP_OK)
    return run.fail(s, "trajectory");
  return kExitOk;
}

int run_command_line(std::vector<std::string> args);

int cmd_replay(const std::string& manifest_path, const std::string& out_dir) {
  std::ifstream is(manifest_path);
  if (!is) {
    std::cerr << "asep-lab: cannot read " << manifest_path << '\n';
    return kExitUsage;
  }
  json manifest;
  try {
    manifest = json::parse(is);
  } catch (const json::exception& e) {
    std::cerr << "asep-lab: malformed manifest: " << e.what() << '\n';
    return kExitUsage;
  }
  if (!manifest.contains("argv") || !manifest["argv"].is_array()) {
    std::cerr << "asep-lab: manifest has no argv\n";
    return kExitUsage;
  }
  std::vector<std::string> args{"--out-dir", out_dir};
  const auto recorded = manifest["argv"].get<std::vector<std::string>>();
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    if (recorded[i] == "--out-dir") {
      ++i;
      continue;
    }
    if (recorded[i].rfind("--out-dir=", 0) == 0) continue;
    args.push_back(recorded[i]);
  }
  return run_command_line(std::move(args));
}

int run_command_line(std::vector<std::string> args) {
  CLI::App app{"Exact and simulated laws of ASEP with step Bernoulli initial data", "asep-lab"};
  app.set_version_flag("--version", asep_version());
  app.require_subcommand(1);

  Run run;
  run.argv = args;
  run.started = utc_now();
  app.add_option("--out-dir", run.out_dir, "directory for CSV outputs and the manifest")
      ->capture_default_str();
  app.add_option("--threads", run.threads, "worker threads (default: $ASEP_LAB_THREADS or 1)");

  ExactProbArgs exact;
  asep_numerics_default(&exact.numerics);
  auto* exact_cmd = app.add_subcommand("exact-prob", "P(x_m(t) <= x) from the Fredholm formula");
  exact.params.add(exact_cmd, true, true);
  exact_cmd->add_option("--m", exact.m, "particle label")->required();
  exact_cmd->add_option("--t", exact.t, "time")->required();
  exact_cmd->add_option("--x-min", exact.x_min)->required();
  exact_cmd->add_option("--x-max", exact.x_max)->required();
  exact_cmd->add_flag("--gamma-clock", exact.gamma_clock, "use t / (q - p) in the kernel");
  exact_cmd->add_option("--tol", exact.numerics.tol, "quadrature tolerance")->capture_default_str();
  exact_cmd->add_option("--n-xi", exact.numerics.n_xi)->capture_default_str();
  exact_cmd->add_option("--n-cap", exact.numerics.n_cap)->capture_default_str();
  exact_cmd->add_option("--radius", exact.numerics.radius, "xi-contour radius (0: adaptive)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo positions and currents");
  sim.params.add(sim_cmd, true, true);
  sim_cmd->add_option("--t", sim.t, "physical time")->required();
  sim_cmd->add_option("--trials", sim.trials)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--m-list", sim.m_list, "particle labels")->delimiter(',');
  sim_cmd->add_option("--x-list", sim.x_list, "current sites")->delimiter(',');
  sim_cmd->add_option("--margin", sim.margin, "extra sampled labels (negative: automatic)")
      ->capture_default_str();

  LimitDistArgs dist;
  asep_law_numerics_default(&dist.numerics);
  auto* dist_cmd = app.add_subcommand("limit-dist", "tabulate G, F2 or F1sq");
  dist_cmd->add_option("--law", dist.law, "g, f2 or f1sq")->required();
  dist_cmd->add_option("--s-min", dist.s_min)->capture_default_str();
  dist_cmd->add_option("--s-max", dist.s_max)->capture_default_str();
  dist_cmd->add_option("--step", dist.step)->capture_default_str();
  dist_cmd->add_option("--nquad", dist.numerics.n_quad)->capture_default_str();
  dist_cmd->add_option("--length", dist.numerics.length)->capture_default_str();
  dist_cmd->add_option("--tol", dist.numerics.tol)->capture_default_str();

  IdentityArgs ident;
  auto* ident_cmd = app.add_subcommand("verify-identities", "exact rational identity checks");
  ident_cmd->add_option("--kmax", ident.k_max)->check(CLI::Range(1, 6))->capture_default_str();
  ident_cmd->add_option("--points-per-k", ident.points_per_k)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ident_cmd->add_option("--seed", ident.seed)->capture_default_str();
  ident_cmd->add_flag("--perturb-tau", ident.perturb_tau, "fault injection: shift tau on every lhs");

  ConvergeArgs conv;
  auto* conv_cmd = app.add_subcommand("converge", "KS distance to the limit law along t");
  conv.params.add(conv_cmd, false, true);
  conv_cmd->add_option("--mode", conv.mode, "position or current")->capture_default_str();
  conv_cmd->add_option("--regime", conv.regime, "auto, tw2, critical or gaussian")
      ->capture_default_str();
  conv_cmd->add_option("--sigma", conv.sigma, "m / t (position mode)");
  conv_cmd->add_option("--v", conv.v, "x / t (current mode)");
  conv_cmd->add_option("--t-list", conv.t_list, "increasing times")->delimiter(',')->required();
  conv_cmd->add_option("--trials", conv.trials)->capture_default_str();
  conv_cmd->add_option("--seed", conv.seed)->capture_default_str();

  TrajectoryArgs traj;
  auto* traj_cmd = app.add_subcommand("trajectory", "one untruncated trajectory as snapshots");
  traj.params.add(traj_cmd, true, false);
  traj_cmd->add_option("--particles", traj.particles)->capture_default_str();
  traj_cmd->add_option("--t", traj.t)->capture_default_str();
  traj_cmd->add_option("--snapshots", traj.snapshots)->capture_default_str();
  traj_cmd->add_option("--seed", traj.seed)->capture_default_str();

  std::string manifest_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay_cmd->add_option("manifest", manifest_path)->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (replay_cmd->parsed()) return cmd_replay(manifest_path, run.out_dir);

  run.threads = resolve_threads(run.threads);
  std::error_code ec;
  fs::create_directories(run.out_dir, ec);
  if (ec) {
    std::cerr << "asep-lab: cannot create " << run.out_dir << ": " << ec.message() << '\n';
    return kExitUsage;
  }

  int code = kExitUsage;
  try {
    if (exact_cmd->parsed()) {
      run.command = "exact-prob";
      code = cmd_exact_prob(run, exact);
    } else if (sim_cmd->parsed()) {
      run.command = "simulate";
      code = cmd_simulate(run, sim);
    } else if (dist_cmd->parsed()) {
      run.command = "limit-dist";
      code = cmd_limit_dist(run, dist);
    } else if (ident_cmd->parsed()) {
      run.command = "verify-identities";
      code = cmd_verify_identities(run, ident);
    } else if (conv_cmd->parsed()) {
      run.command = "converge";
      code = cmd_converge(run, conv);
    } else if (traj_cmd->parsed()) {
      run.command = "trajectory";
      code = cmd_trajectory(run, traj);
    }
  } catch (const std::exception& e) {
    std::cerr << "asep-lab: " << e.what() << '\n';
    run.messages.push_back(e.what());
    code = kExitUsage;
  }
  run.write_manifest(code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  return run_command_line(std::vector<std::string>(argv + 1, argv + argc));
}
