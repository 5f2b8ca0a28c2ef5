#include <chrono>
#include <cmath>
#include <sstream>

#include "apd/errors.hpp"
#include "apd/harness.hpp"

namespace apd {

using nlohmann::json;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

ParamSchedule certified(const ParamSchedule& s, const ScheduleConstants& pc, int t_max, ValidationMode mode) {
  const ScheduleReport rep = validate_schedule(s, pc, t_max, mode);
  if (!rep.pass) throw DegenerateSchedule("bench schedule failed validation: " + rep.first_violation);
  return s.certify(rep);
}

ParamSchedule constant_schedule(int n, double beta, double theta, double eta, double tau) {
  const auto v = [n](double x) { return std::vector<double>(static_cast<std::size_t>(n), x); };
  return ParamSchedule::custom(v(beta), v(theta), v(eta), v(tau));
}

// Criterion 1: bounded deterministic rate at every t.
CriterionResult det_bounded(bool quick) {
  const auto t0 = clock_type::now();
  const int N = quick ? 1000 : 10000;
  const auto p = generate_problem("matrix_game", {{"m", 10}, {"n", 10}}, 42);
  ScheduleConstants c = problem_constants(p);
  c.N = N;
  const ParamSchedule s = ParamSchedule::make(ScheduleVariant::bounded_det, c);
  const Trajectory tr = run(Algorithm::apd, p, nullptr, s, N);
  double worst = -INFINITY;
  int worst_t = 0;
  bool ok = !tr.failed;
  for (const auto& r : tr.records) {
    if (!r.gap || !r.bound) {
      ok = false;
      continue;
    }
    const double ex = *r.gap - *r.bound;
    if (ex > worst) worst = ex, worst_t = r.t;
    ok = ok && ex <= 1e-9;
  }
  const double secs = seconds_since(t0);
  ok = ok && tr.records.size() == static_cast<std::size_t>(N - 1) && secs < 10.0;
  CriterionResult res{1, "deterministic bounded rate", ok, "", {}};
  res.detail = "t in [2," + std::to_string(N) + "], max(gap - bound) = " + fmt(worst) + " at t=" +
               std::to_string(worst_t) + ", " + fmt(secs) + " s";
  res.data = {{"N", N}, {"max_excess", worst}, {"t_at_max", worst_t}, {"seconds", secs},
              {"D_X", c.D_X}, {"D_Y", c.D_Y}, {"L_K", c.L_K}};
  return res;
}

// Criterion 2: APD against linearized primal-dual with constant steps on a stiff quadratic.
CriterionResult l_g_insensitivity(bool quick) {
  const auto t0 = clock_type::now();
  const int N = 1000;
  const auto p = generate_problem("quad_bilinear", {{"n", 10}, {"m", 10}, {"L_G", 1e4}, {"L_K", 1.0}}, 42);
  const ScheduleConstants pc = problem_constants(p);
  ScheduleConstants c = pc;
  c.N = N;
  const ParamSchedule s = ParamSchedule::make(ScheduleVariant::bounded_det, c);
  CaptureOptions cap;
  cap.cadence = quick ? 99 : 1;
  const Trajectory apd_tr = run(Algorithm::apd, p, nullptr, s, N, cap);
  const double gap100 = *apd_tr.records[98].gap;
  const double literal = 2e4 / 9900.0 + 2.0 / 100.0;
  const double set_bound = rate_bounded_det(c, 100);
  const double apd_gap = exact_gap(p, {apd_tr.final_state.x_ag, apd_tr.final_state.y_ag});

  // Constant steps with L_G eta + L_K^2 eta tau = 1, so tau eta L_K^2 < 1.
  const double eta = 1.0 / (p.L_G + p.L_K), tau = 1.0 / p.L_K;
  const ParamSchedule base = certified(constant_schedule(N, 1.0, 1.0, eta, tau), pc, N - 1, ValidationMode::baseline);
  CaptureOptions none;
  none.cadence = 0;
  const Trajectory b_tr = run(Algorithm::pd_baseline, p, nullptr, base, N, none);
  const double base_gap = exact_gap(p, {b_tr.final_state.x_ag, b_tr.final_state.y_ag});
  const double secs = seconds_since(t0);

  const bool ok = !apd_tr.failed && !b_tr.failed && gap100 <= literal && gap100 <= set_bound &&
                  5.0 * apd_gap <= base_gap && secs < 30.0;
  CriterionResult res{2, "L_G insensitivity", ok, "", {}};
  res.detail = "gap(t=100) = " + fmt(gap100) + " <= " + fmt(literal) + " (unit-radius form; set-diameter bound " +
               fmt(set_bound) + "), gap(N=1000) APD " + fmt(apd_gap) + " vs linearized PD " + fmt(base_gap) +
               " (ratio " + fmt(base_gap / apd_gap) + ")";
  res.data = {{"gap_t100", gap100}, {"threshold_unit_radius", literal}, {"bound_set_diameter", set_bound},
              {"apd_gap_N", apd_gap}, {"baseline_gap_N", base_gap}, {"seconds", secs}};
  return res;
}

// Criterion 3: deterministic certificates on free sets.
CriterionResult det_unbounded(bool) {
  const auto t0 = clock_type::now();
  const auto p = generate_problem("unbounded_quad", {{"n", 20}, {"m", 20}, {"L_G", 10.0}, {"L_K", 1.0}}, 42);
  bool ok = true;
  json rows = json::array();
  std::string detail;
  for (int N : {50, 200}) {
    ScheduleConstants c = problem_constants(p);
    c.N = N;
    const ParamSchedule s = ParamSchedule::make(ScheduleVariant::unbounded_det, c);
    CaptureOptions cap;
    cap.iterates = true;
    const Trajectory tr = run(Algorithm::apd, p, nullptr, s, N, cap);
    const auto cert = perturbation_certificate_det(tr.final_state, p, s);
    const SaddleOffsets o = saddle_offsets(p, tr.start);
    const double d_hat = std::sqrt(o.x * o.x + o.y * o.y);
    const BoundValue b = rate_unbounded_det(c, N, d_hat);
    const double slack = saddle_distance_slack(tr, p, s);
    const double scale = o.x * o.x + o.y * o.y;
    const double pg = perturbed_gap(p, {tr.final_state.x_ag, tr.final_state.y_ag}, cert.v());
    const bool row_ok = !tr.failed && cert.delta <= b.value && cert.v_norm() <= *b.secondary &&
                        slack >= -1e-9 * std::max(1.0, scale) && pg <= cert.delta + 1e-9 * std::max(1.0, cert.delta);
    ok = ok && row_ok;
    rows.push_back({{"N", N}, {"delta", cert.delta}, {"delta_bound", b.value}, {"v_norm", cert.v_norm()},
                    {"v_bound", *b.secondary}, {"D_hat", d_hat}, {"distance_slack_min", slack},
                    {"perturbed_gap", pg}});
    detail += "N=" + std::to_string(N) + ": delta " + fmt(cert.delta) + " <= " + fmt(b.value) + ", |v| " +
              fmt(cert.v_norm()) + " <= " + fmt(*b.secondary) + ", min distance slack " + fmt(slack) + "; ";
  }
  return {3, "deterministic unbounded certificates", ok, detail + fmt(seconds_since(t0)) + " s", rows};
}

ExperimentConfig stoch_bounded_config(bool quick) {
  ExperimentConfig c;
  c.generator = "matrix_game";
  c.generator_params = {{"m", 10}, {"n", 10}};
  c.problem_seed = 42;
  c.algorithm = Algorithm::stochastic_apd;
  c.variant = ScheduleVariant::bounded_stoch;
  c.noise_model = NoiseModel::bounded_uniform;
  c.sigma_x = 0.5;
  c.sigma_y = 0.5;
  c.N = quick ? 200 : 1000;
  c.replications = quick ? 20 : 100;
  c.capture_cadence = 0;
  c.seed = 1000;
  c.lambdas = {4.0};
  return c;
}

std::vector<CriterionResult> stoch_bounded(bool quick) {
  const auto t0 = clock_type::now();
  const ExperimentOutcome o = run_experiment(stoch_bounded_config(quick));
  const double secs = seconds_since(t0);
  const json& st = o.summary.at("stats");
  const json& checks = o.summary.at("checks");
  bool mean_ok = false, prob_ok = false;
  for (const auto& c : checks) {
    const std::string n = c["name"];
    if (n.rfind("mean final gap", 0) == 0) mean_ok = c["pass"];
    if (n.rfind("P(gap", 0) == 0) prob_ok = c["pass"];
  }
  bool completed = true;
  for (const auto& r : o.summary.at("replications")) completed = completed && !r["failed"].get<bool>();
  const double se = st["standard_error"].is_number() ? st["standard_error"].get<double>() : 0.0;
  CriterionResult c4{4, "stochastic bounded expectation", completed && mean_ok && secs < 120.0, "", st};
  c4.detail = "mean gap " + fmt(st["mean"]) + " <= C_0 " + fmt(st["C_0"]) + " + 2*SE " + fmt(2 * se) + ", " +
              fmt(secs) + " s";
  CriterionResult c5{5, "high-probability tail", completed && prob_ok, "", st};
  c5.detail = "freq(gap > C_0 + 4 C_1) = " + fmt(st["frequencies"][0]) + " <= " + fmt(st["ceilings"][0]) + " + " +
              fmt(st["margins"][0]);
  return {c4, c5};
}

CriterionResult stoch_unbounded(bool quick) {
  const auto t0 = clock_type::now();
  ExperimentConfig c;
  c.generator = "unbounded_quad";
  c.generator_params = {{"n", 20}, {"m", 20}, {"L_G", 10.0}, {"L_K", 1.0}};
  c.problem_seed = 42;
  c.algorithm = Algorithm::stochastic_apd;
  c.variant = ScheduleVariant::unbounded_stoch;
  c.schedule_constants = {{"D_tilde", 1.0}};
  c.noise_model = NoiseModel::gaussian;
  c.sigma_x = 0.1;
  c.sigma_y = 0.1;
  c.disclose = true;
  c.N = 200;
  c.replications = quick ? 10 : 50;
  c.capture_cadence = 0;
  c.seed = 2000;
  const ExperimentOutcome o = run_experiment(c);
  const double secs = seconds_since(t0);
  bool ok = o.exit_code == 0 && o.summary.at("checks").size() == 2;
  std::string detail;
  for (const auto& ch : o.summary.at("checks")) {
    detail += ch["name"].get<std::string>() + ": " + fmt(ch["value"]) + " vs " + fmt(ch["bound"]) + "; ";
    ok = ok && ch["pass"].get<bool>();
  }
  return {6, "stochastic unbounded certificates", ok, detail + fmt(secs) + " s", o.summary.at("stats")};
}

// Criterion 7: beta = 1 reduction and zero-noise equivalence.
CriterionResult reductions(bool) {
  const int N = 1000;
  const auto q = generate_problem("quad_bilinear", {{"n", 5}, {"m", 5}, {"L_G", 1.0}, {"L_K", 1.0}}, 7);
  const ParamSchedule flat =
      certified(constant_schedule(N, 1.0, 1.0, 0.5, 0.5), problem_constants(q), N - 1, ValidationMode::baseline);
  CaptureOptions cap;
  cap.cadence = 0;
  cap.iterates = true;
  const Trajectory a = run(Algorithm::apd, q, nullptr, flat, N, cap);
  const Trajectory b = run(Algorithm::pd_baseline, q, nullptr, flat, N, cap);
  bool same = !a.failed && !b.failed && a.records.size() == b.records.size();
  for (std::size_t i = 0; same && i < a.records.size(); ++i)
    same = a.records[i].z->x == b.records[i].z->x && a.records[i].z->y == b.records[i].z->y;

  const auto mg = std::make_shared<const SaddlePointProblem>(
      generate_problem("matrix_game", {{"m", 10}, {"n", 10}}, 42));
  ScheduleConstants c = problem_constants(*mg);
  c.N = N;
  const ParamSchedule s = ParamSchedule::make(ScheduleVariant::bounded_det, c);
  StochasticOracle zero(mg, NoiseSpec{}, 99, false);
  const Trajectory d = run(Algorithm::apd, *mg, nullptr, s, N, cap);
  const Trajectory e = run(Algorithm::stochastic_apd, *mg, &zero, s, N, cap);
  double diff = d.failed || e.failed || d.records.size() != e.records.size() ? INFINITY : 0.0;
  for (std::size_t i = 0; std::isfinite(diff) && i < d.records.size(); ++i) {
    diff = std::max({diff, (d.records[i].z->x - e.records[i].z->x).cwiseAbs().maxCoeff(),
                     (d.records[i].z->y - e.records[i].z->y).cwiseAbs().maxCoeff(),
                     (d.records[i].z_ag->x - e.records[i].z_ag->x).cwiseAbs().maxCoeff(),
                     (d.records[i].z_ag->y - e.records[i].z_ag->y).cwiseAbs().maxCoeff()});
  }
  const bool ok = same && diff <= 1e-12;
  return {7, "reduction identities", ok,
          std::string("(a) beta=1 APD vs linearized PD iterates ") + (same ? "identical" : "DIFFER") +
              " over " + std::to_string(N - 1) + " steps; (b) zero-noise max deviation " + fmt(diff),
          {{"beta_one_identical", same}, {"zero_noise_max_dev", diff}}};
}

}  // namespace

const std::vector<std::string>& bench_suites() {
  static const std::vector<std::string> s{"det-bounded", "det-unbounded", "stoch-bounded", "stoch-unbounded",
                                          "baseline-compare"};
  return s;
}

std::vector<CriterionResult> run_bench(const std::string& suite, bool quick) {
  if (suite == "det-bounded") return {det_bounded(quick)};
  if (suite == "det-unbounded") return {det_unbounded(quick)};
  if (suite == "stoch-bounded") return stoch_bounded(quick);
  if (suite == "stoch-unbounded") return {stoch_unbounded(quick)};
  if (suite == "baseline-compare") return {l_g_insensitivity(quick), reductions(quick)};
  throw ConfigError("unknown bench suite '" + suite + "'");
}

}  // namespace apd
