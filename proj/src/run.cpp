#include <chrono>
#include <sstream>

#include "apd/certification.hpp"
#include "apd/errors.hpp"
#include "apd/solvers.hpp"

namespace apd {

namespace {

std::optional<double> bound_at(const SaddlePointProblem& p, const ParamSchedule& sch, int s,
                               const PointPair& start) {
  const auto& c = sch.constants();
  try {
    switch (sch.variant()) {
      case ScheduleVariant::bounded_det: return rate_bounded_det(c, s + 1);
      case ScheduleVariant::bounded_stoch: {
        const RadiusBound rx = set_radius(p.geometry_x, p.set_x), ry = set_radius(p.geometry_y, p.set_y);
        if (rx.unbounded || ry.unbounded) return std::nullopt;
        return q0_bound(sch, s, rx.omega_sq, ry.omega_sq, c.sigma_x, c.sigma_y);
      }
      case ScheduleVariant::unbounded_det:
        return step_bound_unbounded_det(sch, s, saddle_offsets(p, start)).value;
      case ScheduleVariant::unbounded_stoch:
        return step_bound_unbounded_stoch(sch, s, saddle_offsets(p, start), c.sigma_x, c.sigma_y).value;
      case ScheduleVariant::custom: break;
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

void certify_record(IterationRecord& r, Algorithm alg, const SolverState& st, const SaddlePointProblem& p,
                    const ParamSchedule& sch, const PointPair& start) {
  const PointPair zag{st.x_ag, st.y_ag};
  if (p.set_x.bounded() && p.set_y.bounded()) {
    try {
      r.gap = exact_gap(p, zag);
    } catch (const UnsupportedEvaluation&) {
    }
  } else if (alg != Algorithm::pd_baseline) {
    try {
      const PerturbationCertificate c = alg == Algorithm::apd ? perturbation_certificate_det(st, p, sch)
                                                              : perturbation_certificate_stoch(st, p, sch);
      r.delta = c.delta;
      r.v_norm = c.v_norm();
    } catch (const Error&) {
    }
  }
  if (alg != Algorithm::pd_baseline) r.bound = bound_at(p, sch, st.t - 1, start);
  if (p.known_saddle) r.dist_to_saddle = pair_distance(zag, *p.known_saddle);
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

Trajectory run(Algorithm alg, const SaddlePointProblem& p, StochasticOracle* oracle, const ParamSchedule& sch,
               int N, const CaptureOptions& cap, const std::optional<PointPair>& start) {
  if (N < 2) throw InvalidArgument("run needs N >= 2");
  if (cap.cadence < 0) throw InvalidArgument("capture cadence must be >= 0");
  if (alg == Algorithm::stochastic_apd && !oracle) throw InvalidArgument("stochastic_apd needs an oracle");

  Trajectory tr;
  tr.meta.algorithm = to_string(alg);
  tr.meta.schedule_variant = to_string(sch.variant());
  tr.meta.seed = oracle ? oracle->seed() : 0;
  tr.meta.N = N;
  SolverState st = initial_state(p, start);
  st.log_noise = cap.noise_log;
  tr.start = {st.x, st.y};
  tr.records.reserve(N - 1);

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  for (int s = 1; s < N; ++s) {
    try {
      switch (alg) {
        case Algorithm::apd: st = apd_step(st, p, sch); break;
        case Algorithm::stochastic_apd: st = stochastic_apd_step(st, p, *oracle, sch); break;
        case Algorithm::pd_baseline: st = pd_baseline_step(st, p, sch, cap.linearized); break;
      }
    } catch (const std::exception& e) {
      tr.failed = true;
      tr.failure = "step " + std::to_string(s) + ": " + e.what();
      break;
    }
    IterationRecord r;
    r.t = s + 1;
    r.captured = cap.cadence > 0 && (s - 1) % cap.cadence == 0;
    if (r.captured) {
      certify_record(r, alg, st, p, sch, tr.start);
      if (cap.wall_time) r.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    }
    if (cap.iterates) {
      r.z = PointPair{st.x, st.y};
      r.z_ag = PointPair{st.x_ag, st.y_ag};
    }
    tr.records.push_back(std::move(r));
  }
  tr.final_state = std::move(st);
  return tr;
}

std::string Trajectory::to_csv() const {
  std::ostringstream out;
  out << "t,gap,bound,delta,v_norm,dist_to_saddle,wall_ms\n";
  auto cell = [&](const std::optional<double>& v) {
    out << ',';
    if (v) out << format_double(*v);
  };
  for (const auto& r : records) {
    if (!r.captured) continue;
    out << r.t;
    cell(r.gap);
    cell(r.bound);
    cell(r.delta);
    cell(r.v_norm);
    cell(r.dist_to_saddle);
    cell(r.wall_ms);
    out << '\n';
  }
  return out.str();
}

nlohmann::json Trajectory::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records) {
    if (!r.captured) continue;
    recs.push_back({{"t", r.t},
                    {"gap", opt(r.gap)},
                    {"bound", opt(r.bound)},
                    {"delta", opt(r.delta)},
                    {"v_norm", opt(r.v_norm)},
                    {"dist_to_saddle", opt(r.dist_to_saddle)},
                    {"wall_ms", opt(r.wall_ms)}});
  }
  auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j = {{"metadata",
                       {{"algorithm", meta.algorithm},
                        {"schedule_variant", meta.schedule_variant},
                        {"seed", meta.seed},
                        {"problem_digest", meta.problem_digest},
                        {"N", meta.N}}},
                      {"steps", records.size()},
                      {"failed", failed},
                      {"records", recs}};
  if (failed) j["failure"] = failure;
  if (final_state.x_ag.size() > 0) j["final"] = {{"x_ag", vec(final_state.x_ag)}, {"y_ag", vec(final_state.y_ag)}};
  return j;
}

}  // namespace apd
