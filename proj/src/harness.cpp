#include "apd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "apd/errors.hpp"
#include "apd/problem_io.hpp"
#include "apd/rng.hpp"

namespace apd {

using nlohmann::json;

namespace {

Mat random_orthogonal(int n, CounterRng& rng) {
  Mat g(n, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) g(i, k) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Vec d = qr.matrixQR().diagonal();
  for (int i = 0; i < n; ++i)
    if (d(i) < 0) q.col(i) *= -1.0;
  return q;
}

Vec random_direction(int n, double radius, CounterRng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return radius * v / v.norm();
}

int positive_int(const json& p, const char* key) {
  if (!p.contains(key)) throw InvalidArgument(std::string("generator parameter '") + key + "' missing");
  const int v = p.at(key).get<int>();
  if (v <= 0) throw InvalidArgument(std::string("generator parameter '") + key + "' must be positive");
  return v;
}

SaddlePointProblem quad_family(const json& prm, std::uint64_t seed, bool bounded) {
  const int n = positive_int(prm, "n"), m = positive_int(prm, "m");
  const double lg = prm.value("L_G", 1.0), lk = prm.value("L_K", 1.0);
  if (!(lg >= 0.0) || !(lk > 0.0)) throw InvalidArgument("quadratic generator needs L_G >= 0 and L_K > 0");

  CounterRng ra(seed, 0), ru(seed, 1), rv(seed, 2), rs(seed, 3), rx(seed, 4), ry(seed, 5);
  Vec a(n);
  for (int i = 0; i < n; ++i) a(i) = ra.uniform();
  a /= a.maxCoeff();
  const int r = std::min(n, m);
  Vec s(r);
  for (int i = 0; i < r; ++i) s(i) = rs.uniform();
  s /= s.maxCoeff();
  const Mat u = random_orthogonal(m, ru), v = random_orthogonal(n, rv);
  Mat sig = Mat::Zero(m, n);
  sig.diagonal().head(r) = s;
  const Mat k = lk * u * sig * v.transpose();

  const double radius = bounded ? 0.5 : 1.0;
  const Vec xh = random_direction(n, radius, rx), yh = random_direction(m, radius, ry);
  const Mat h = lg * a.array().square().matrix().asDiagonal();
  const Vec b = k * xh;
  const Vec c = -h * xh - k.transpose() * yh;

  SetDescriptor sx = bounded ? SetDescriptor::ball(Vec::Zero(n), 1.0) : SetDescriptor::free(n);
  SetDescriptor sy = bounded ? SetDescriptor::ball(Vec::Zero(m), 1.0) : SetDescriptor::free(m);
  return make_problem(SmoothTerm::quadratic(h, c), lg, LinearOperator::dense(k), lk, SimpleTerm::linear(b),
                      std::move(sx), std::move(sy), PointPair{xh, yh});
}

}  // namespace

SaddlePointProblem generate_problem(const std::string& name, const json& params, std::uint64_t seed) {
  if (name == "matrix_game") {
    const int m = positive_int(params, "m"), n = positive_int(params, "n");
    CounterRng rng(seed, 0);
    Mat k(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) k(i, j) = rng.uniform(-1.0, 1.0);
    const double lk = Eigen::JacobiSVD<Mat>(k).singularValues()(0);
    return make_problem(SmoothTerm::zero(m), 0.0, LinearOperator::dense(k), lk, SimpleTerm::zero(n),
                        SetDescriptor::simplex(m), SetDescriptor::simplex(n));
  }
  if (name == "quad_bilinear") return quad_family(params, seed, true);
  if (name == "unbounded_quad") return quad_family(params, seed, false);
  throw InvalidArgument("unknown generator '" + name + "' (matrix_game, quad_bilinear, unbounded_quad)");
}

ScheduleConstants problem_constants(const SaddlePointProblem& p) {
  ScheduleConstants c;
  c.L_G = p.L_G;
  c.L_K = p.L_K;
  c.alpha_x = p.geometry_x.alpha;
  c.alpha_y = p.geometry_y.alpha;
  if (p.set_x.bounded()) c.D_X = diameter_constant(p.geometry_x, p.set_x);
  if (p.set_y.bounded()) c.D_Y = diameter_constant(p.geometry_y, p.set_y);
  return c;
}

ReplicationStats replicate_stats(const std::vector<double>& values, double c0, double c1,
                                 const std::vector<double>& lambdas) {
  if (values.empty()) throw InvalidArgument("replicate_stats needs at least one value");
  ReplicationStats st;
  st.values = values;
  const double r = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  st.mean = sum / r;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.standard_error = std::sqrt(ss / (r - 1.0)) / std::sqrt(r);
  }
  st.lambdas = lambdas;
  for (double l : lambdas) {
    const double thr = c0 + l * c1;
    const auto above = std::count_if(values.begin(), values.end(), [&](double v) { return v > thr; });
    const double p0 = std::min(1.0, tail_probability_ceiling(l));
    st.thresholds.push_back(thr);
    st.frequencies.push_back(static_cast<double>(above) / r);
    st.ceilings.push_back(tail_probability_ceiling(l));
    st.margins.push_back(1.96 * std::sqrt(p0 * (1.0 - p0) / r));
  }
  return st;
}

json ReplicationStats::to_json() const {
  return {{"count", values.size()},
          {"mean", mean},
          {"standard_error", standard_error ? json(*standard_error) : json("unavailable")},
          {"lambdas", lambdas},
          {"thresholds", thresholds},
          {"frequencies", frequencies},
          {"ceilings", ceilings},
          {"margins", margins},
          {"values", values}};
}

// ---- configuration ----

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  static const std::set<std::string> known{
      "generator", "generator_params", "problem_seed", "inline_problem", "algorithm", "linearized",
      "variant", "schedule_constants", "custom_schedule", "mode", "noise_model", "sigma_x", "sigma_y",
      "disclose", "N", "replications", "capture_cadence", "seed", "lambdas", "output_dir", "threads"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw ConfigError("unknown config field '" + k + "'");
  ExperimentConfig c;
  try {
    c.generator = j.value("generator", "");
    c.generator_params = j.value("generator_params", json::object());
    c.problem_seed = j.value("problem_seed", std::uint64_t{0});
    if (j.contains("inline_problem")) c.inline_problem = j["inline_problem"];
    if (c.generator.empty() && !c.inline_problem) throw ConfigError("config needs 'generator' or 'inline_problem'");
    const std::string alg = j.value("algorithm", "apd");
    c.algorithm = algorithm_from_string(alg);
    c.linearized = j.value("linearized", true);
    c.variant = schedule_variant_from_string(j.value("variant", "bounded_det"));
    c.schedule_constants = j.value("schedule_constants", json::object());
    if (j.contains("custom_schedule")) c.custom_schedule = j["custom_schedule"];
    if (j.contains("mode")) c.mode = validation_mode_from_string(j["mode"].get<std::string>());
    c.noise_model = noise_model_from_string(j.value("noise_model", "none"));
    c.sigma_x = j.value("sigma_x", 0.0);
    c.sigma_y = j.value("sigma_y", 0.0);
    c.disclose = j.value("disclose", false);
    c.N = j.value("N", 2);
    c.replications = j.value("replications", 1);
    c.capture_cadence = j.value("capture_cadence", 1);
    c.seed = j.value("seed", std::uint64_t{0});
    c.lambdas = j.value("lambdas", std::vector<double>{4.0});
    c.output_dir = j.value("output_dir", "");
    c.threads = j.value("threads", 0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (c.N < 2) throw ConfigError("N must be >= 2");
  if (c.replications < 1) throw ConfigError("replications must be >= 1");
  if (c.capture_cadence < 0) throw ConfigError("capture_cadence must be >= 0");
  if (c.sigma_x < 0 || c.sigma_y < 0) throw ConfigError("noise levels must be >= 0");
  return c;
}

json ExperimentConfig::to_json() const {
  json j = {{"generator", generator},
            {"generator_params", generator_params},
            {"problem_seed", problem_seed},
            {"algorithm", algorithm == Algorithm::pd_baseline && linearized ? "pd_linearized" : apd::to_string(algorithm)},
            {"linearized", linearized},
            {"variant", apd::to_string(variant)},
            {"schedule_constants", schedule_constants},
            {"noise_model", apd::to_string(noise_model)},
            {"sigma_x", sigma_x},
            {"sigma_y", sigma_y},
            {"disclose", disclose},
            {"N", N},
            {"replications", replications},
            {"capture_cadence", capture_cadence},
            {"seed", seed},
            {"lambdas", lambdas},
            {"output_dir", output_dir},
            {"threads", threads}};
  if (inline_problem) j["inline_problem"] = *inline_problem;
  if (custom_schedule) j["custom_schedule"] = *custom_schedule;
  if (mode) j["mode"] = apd::to_string(*mode);
  return j;
}

void apply_seed_override(ExperimentConfig& c) {
  const char* env = std::getenv("SPP_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("SPP_SEED is not an unsigned integer: ") + env);
  c.seed = v;
}

std::shared_ptr<const SaddlePointProblem> build_problem(const ExperimentConfig& c) {
  try {
    if (c.inline_problem) return std::make_shared<const SaddlePointProblem>(problem_from_json(*c.inline_problem));
    return std::make_shared<const SaddlePointProblem>(generate_problem(c.generator, c.generator_params, c.problem_seed));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

namespace {

std::vector<double> sequence(const json& j, const char* key, int n) {
  if (!j.contains(key)) throw ConfigError(std::string("custom_schedule needs '") + key + "'");
  const json& v = j.at(key);
  if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(n), v.get<double>());
  return v.get<std::vector<double>>();
}

}  // namespace

PreparedSchedule prepare_schedule(const ExperimentConfig& c, const SaddlePointProblem& p) {
  const ScheduleConstants pc = problem_constants(p);
  try {
    std::optional<ParamSchedule> s;
    ValidationMode mode;
    if (c.variant == ScheduleVariant::custom) {
      if (!c.custom_schedule) throw ConfigError("variant custom needs custom_schedule");
      const json& cs = *c.custom_schedule;
      std::optional<double> pv, qv;
      if (cs.contains("p")) pv = cs["p"].get<double>();
      if (cs.contains("q")) qv = cs["q"].get<double>();
      s = ParamSchedule::custom(sequence(cs, "beta", c.N), sequence(cs, "theta", c.N), sequence(cs, "eta", c.N),
                                sequence(cs, "tau", c.N), pv, qv);
      mode = c.mode.value_or(c.algorithm == Algorithm::pd_baseline ? ValidationMode::baseline : ValidationMode::bounded);
    } else {
      ScheduleConstants k = pc;
      k.sigma_x = c.sigma_x;
      k.sigma_y = c.sigma_y;
      k.N = c.N;
      const json& o = c.schedule_constants;
      k.L_G = o.value("L_G", k.L_G);
      k.L_K = o.value("L_K", k.L_K);
      k.alpha_x = o.value("alpha_x", k.alpha_x);
      k.alpha_y = o.value("alpha_y", k.alpha_y);
      k.D_X = o.value("D_X", k.D_X);
      k.D_Y = o.value("D_Y", k.D_Y);
      k.sigma_x = o.value("sigma_x", k.sigma_x);
      k.sigma_y = o.value("sigma_y", k.sigma_y);
      k.D_tilde = o.value("D_tilde", k.D_tilde);
      s = ParamSchedule::make(c.variant, k);
      mode = c.mode.value_or(default_mode(c.variant));
    }
    ScheduleReport rep = validate_schedule(*s, pc, std::max(2, c.N - 1), mode);
    if (rep.pass) s = s->certify(rep);
    return {*s, std::move(rep)};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, target);
}

// ---- experiments ----

namespace {

struct Replica {
  Trajectory trajectory;
  std::optional<double> gap, delta, v_norm;
};

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json check(const std::string& name, double value, double bound, bool pass) {
  return {{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}};
}

bool within(double value, double bound) { return value <= bound + 1e-9 * std::max(1.0, std::abs(bound)); }

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  std::shared_ptr<const SaddlePointProblem> prob;
  std::optional<PreparedSchedule> prep;
  try {
    prob = build_problem(cfg);
    prep = prepare_schedule(cfg, *prob);
  } catch (const ConfigError& e) {
    out.exit_code = 2;
    out.summary = {{"error", e.what()}, {"pass", false}};
    return out;
  }
  const std::string digest = problem_digest(*prob);
  auto write = [&](const std::string& name, const std::string& text) {
    if (!cfg.output_dir.empty()) write_file_atomic((std::filesystem::path(cfg.output_dir) / name).string(), text);
  };
  if (!prep->report.pass) {
    out.exit_code = 2;
    out.summary = {{"error", "schedule validation failed: " + prep->report.first_violation},
                   {"schedule_report", prep->report.to_json()},
                   {"pass", false}};
    write("schedule_report.json", prep->report.to_json().dump(2) + "\n");
    return out;
  }
  const ParamSchedule& sch = prep->schedule;
  const NoiseSpec noise = NoiseSpec::from_totals(cfg.noise_model, cfg.sigma_x, cfg.sigma_y);

  std::vector<Replica> reps(static_cast<std::size_t>(cfg.replications));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int r = next++; r < cfg.replications; r = next++) {
      Replica& rep = reps[static_cast<std::size_t>(r)];
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(r);
      std::optional<StochasticOracle> oracle;
      if (cfg.algorithm == Algorithm::stochastic_apd) oracle.emplace(prob, noise, seed, cfg.disclose);
      CaptureOptions cap;
      cap.cadence = cfg.capture_cadence;
      cap.linearized = cfg.linearized;
      rep.trajectory = run(cfg.algorithm, *prob, oracle ? &*oracle : nullptr, sch, cfg.N, cap);
      rep.trajectory.meta.seed = seed;
      rep.trajectory.meta.problem_digest = digest;
      const SolverState& st = rep.trajectory.final_state;
      if (rep.trajectory.failed) continue;
      try {
        if (prob->set_x.bounded() && prob->set_y.bounded()) {
          rep.gap = exact_gap(*prob, {st.x_ag, st.y_ag});
        } else if (cfg.algorithm != Algorithm::pd_baseline) {
          const auto c = cfg.algorithm == Algorithm::apd ? perturbation_certificate_det(st, *prob, sch)
                                                         : perturbation_certificate_stoch(st, *prob, sch);
          rep.delta = c.delta;
          rep.v_norm = c.v_norm();
        }
      } catch (const Error&) {
      }
    }
  };
  int nt = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  nt = std::min(nt, cfg.replications);
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // ---- checks ----
  json checks = json::array();
  json rep_rows = json::array();
  bool any_failed = false;
  std::vector<double> gaps, deltas, vnorms;
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const Replica& rp = reps[r];
    any_failed = any_failed || rp.trajectory.failed;
    json row = {{"replication", r},
                {"seed", rp.trajectory.meta.seed},
                {"failed", rp.trajectory.failed},
                {"final_gap", opt_json(rp.gap)},
                {"final_delta", opt_json(rp.delta)},
                {"final_v_norm", opt_json(rp.v_norm)}};
    if (rp.trajectory.failed) row["failure"] = rp.trajectory.failure;
    rep_rows.push_back(row);
    if (rp.gap) gaps.push_back(*rp.gap);
    if (rp.delta) deltas.push_back(*rp.delta);
    if (rp.v_norm) vnorms.push_back(*rp.v_norm);
  }
  if (any_failed) checks.push_back(check("all replications completed", 0, 0, false));

  const ScheduleConstants& k = sch.constants();
  const int N = cfg.N;
  json stats = json::object();
  const bool det = cfg.algorithm == Algorithm::apd;
  const bool sto = cfg.algorithm == Algorithm::stochastic_apd;

  if (det) {
    // Per-record conformance: gap or delta against the bound column.
    double worst = -INFINITY;
    bool ok = true, any = false;
    for (const auto& rp : reps)
      for (const auto& rec : rp.trajectory.records) {
        const std::optional<double>& val = rec.gap ? rec.gap : rec.delta;
        if (!rec.captured || !val || !rec.bound) continue;
        any = true;
        worst = std::max(worst, *val - *rec.bound);
        ok = ok && within(*val, *rec.bound);
      }
    if (any) checks.push_back(check("every captured value <= bound column (max excess)", worst, 0.0, ok));
  }
  std::optional<double> d_hat, d_w;
  if (prob->known_saddle) {
    const SaddleOffsets o = saddle_offsets(*prob, reps.front().trajectory.start);
    d_hat = std::sqrt(o.x * o.x + o.y * o.y);
    d_w = weighted_start_distance(sch, o);
  }
  if (det && sch.variant() == ScheduleVariant::bounded_det && !gaps.empty()) {
    const double b = rate_bounded_det(k, N);
    checks.push_back(check("final gap <= rate at N", gaps.front(), b, within(gaps.front(), b)));
  }
  if (det && sch.variant() == ScheduleVariant::unbounded_det && d_hat && !deltas.empty()) {
    const BoundValue b = rate_unbounded_det(k, N, *d_hat);
    checks.push_back(check("final delta <= rate at N", deltas.front(), b.value, within(deltas.front(), b.value)));
    checks.push_back(
        check("final |v| <= rate at N", vnorms.front(), *b.secondary, within(vnorms.front(), *b.secondary)));
  }
  auto mc_check = [&](const std::string& name, const std::vector<double>& vals, double bound) {
    const ReplicationStats s = replicate_stats(vals, bound, 0.0, {});
    const double slack = 2.0 * s.standard_error.value_or(0.0);
    checks.push_back({{"name", name},
                      {"value", s.mean},
                      {"bound", bound},
                      {"standard_error", s.standard_error ? json(*s.standard_error) : json("unavailable")},
                      {"pass", s.mean <= bound + slack}});
  };
  if (sto && sch.variant() == ScheduleVariant::bounded_stoch && !gaps.empty()) {
    const double c0 = rate_bounded_stoch_c0(k, N), c1 = rate_bounded_stoch_c1(k, N);
    const ReplicationStats s = replicate_stats(gaps, c0, c1, cfg.lambdas);
    stats = s.to_json();
    stats["C_0"] = c0;
    stats["C_1"] = c1;
    mc_check("mean final gap <= C_0(N) + 2 SE", gaps, c0);
    for (std::size_t i = 0; i < s.lambdas.size(); ++i)
      checks.push_back({{"name", "P(gap > C_0 + lambda C_1) <= ceiling + margin"},
                        {"lambda", s.lambdas[i]},
                        {"value", s.frequencies[i]},
                        {"bound", s.ceilings[i] + s.margins[i]},
                        {"pass", s.frequencies[i] <= s.ceilings[i] + s.margins[i]}});
  }
  if (sto && sch.variant() == ScheduleVariant::unbounded_stoch && d_w && !deltas.empty()) {
    const BoundValue b = rate_unbounded_stoch(k, N, *d_w);
    mc_check("mean final delta <= epsilon rate + 2 SE", deltas, b.value);
    mc_check("mean final |v| <= rate + 2 SE", vnorms, *b.secondary);
    stats = {{"delta", replicate_stats(deltas, b.value, 0.0, {}).to_json()},
             {"v_norm", replicate_stats(vnorms, *b.secondary, 0.0, {}).to_json()}};
  }
  bool pass = true;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  out.exit_code = pass ? 0 : 1;

  out.summary = {{"config", cfg.to_json()},
                 {"problem_digest", digest},
                 {"schedule", sch.to_json()},
                 {"schedule_validation", {{"pass", prep->report.pass}, {"min_margin", prep->report.min_margin}}},
                 {"replications", rep_rows},
                 {"stats", stats},
                 {"checks", checks},
                 {"pass", pass}};
  if (prob->known_saddle) out.summary["D_hat"] = *d_hat, out.summary["D"] = *d_w;

  char name[64];
  for (std::size_t r = 0; r < reps.size(); ++r) {
    out.csv.push_back(reps[r].trajectory.to_csv());
    std::snprintf(name, sizeof name, "trajectory_r%03zu.csv", r);
    write(name, out.csv.back());
  }
  write("schedule_report.json", prep->report.to_json().dump(2) + "\n");
  write("summary.json", out.summary.dump(2) + "\n");
  return out;
}

}  // namespace apd
