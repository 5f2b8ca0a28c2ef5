// Acceptance runner: one PASS/FAIL line per criterion 1..9. Exit status 0 iff all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "apd/certification.hpp"
#include "apd/geometry.hpp"
#include "apd/harness.hpp"
#include "apd/oracle.hpp"
#include "apd/rng.hpp"

using namespace apd;

namespace {

Vec gaussian(int n, CounterRng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

Vec random_simplex(int n, CounterRng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = -std::log1p(-rng.uniform());
  return v / v.sum();
}

Vec random_point(const SetDescriptor& s, CounterRng& rng) {
  if (s.kind() == SetKind::simplex) return random_simplex(s.dim(), rng);
  return s.project(2 * gaussian(s.dim(), rng));
}

CriterionResult audit_criterion() {
  CriterionResult r{8, "recursion audit", true, "", nlohmann::json::object()};
  std::ostringstream d;
  const struct {
    const char* gen;
    nlohmann::json params;
  } cases[] = {{"matrix_game", {{"m", 3}, {"n", 3}}}, {"quad_bilinear", {{"n", 3}, {"m", 3}}}};
  for (const auto& c : cases) {
    const auto p = generate_problem(c.gen, c.params, 42);
    const auto s = ParamSchedule::make(ScheduleVariant::bounded_det, problem_constants(p));
    CaptureOptions cap;
    cap.iterates = true;
    Trajectory tr = run(Algorithm::apd, p, nullptr, s, 101, cap);
    CounterRng rng(8, 0);
    std::vector<PointPair> probes;
    for (int i = 0; i < 20; ++i) probes.push_back({random_point(p.set_x, rng), random_point(p.set_y, rng)});
    const auto rep = recursion_audit(tr, p, s, probes);
    const bool ok = rep.pass && rep.min_residual >= -1e-8;
    tr.records[3].z->x(0) += 0.1;
    const bool flagged = !recursion_audit(tr, p, s, probes).pass;
    r.pass = r.pass && ok && flagged;
    r.data[c.gen] = {{"min_residual", rep.min_residual}, {"steps", rep.min_residual_per_t.size()},
                     {"corruption_flagged", flagged}};
    if (!d.str().empty()) d << "; ";
    d << c.gen << " min residual " << rep.min_residual << (flagged ? ", corruption flagged" : ", corruption MISSED");
  }
  r.detail = d.str();
  return r;
}

CriterionResult property_criterion() {
  CriterionResult r{9, "property suites", true, "", nlohmann::json::object()};
  CounterRng rng(9, 0);
  int failures = 0;
  auto expect = [&](bool ok) { failures += ok ? 0 : 1; };

  // geometry: prox optimality, strong convexity, simplex normalization
  const int n = 6;
  const SetDescriptor sets[] = {SetDescriptor::box(-Vec::Ones(n), Vec::Ones(n)),
                                SetDescriptor::ball(Vec::Zero(n), 1.5), SetDescriptor::simplex(n)};
  for (const auto& set : sets)
    for (int k = 0; k < 200; ++k) {
      const Vec g = gaussian(n, rng), c = random_point(set, rng);
      const double step = 0.05 + rng.uniform();
      const Vec w = prox_map(BregmanGeometry::euclidean(), set, g, nullptr, c, step);
      expect(set.contains(w));
      for (int j = 0; j < 5; ++j) {
        const Vec u = random_point(set, rng);
        expect((g + (w - c) / step).dot(u - w) >= -1e-9);
      }
    }
  for (int k = 0; k < 500; ++k) {
    const Vec x = random_simplex(n, rng), u = random_simplex(n, rng);
    const double l1 = (x - u).lpNorm<1>(), l2 = (x - u).norm();
    expect(bregman_div(BregmanGeometry::entropy(), x, u) >= 0.5 * l1 * l1 - 1e-12);
    expect(bregman_div(BregmanGeometry::euclidean(), x, u) >= 0.5 * l2 * l2 - 1e-12);
    const Vec w = prox_map(BregmanGeometry::entropy(), SetDescriptor::simplex(n), 10 * gaussian(n, rng), nullptr,
                           u, 0.5 + rng.uniform());
    expect(std::abs(w.sum() - 1.0) <= 1e-12 && w.minCoeff() >= 0.0);
  }
  const int geo_fail = failures;

  // schedules at t <= 1e4 with the built-in slack values
  ScheduleConstants k;
  k.L_G = 3.0;
  k.L_K = 2.0;
  k.D_X = 1.5;
  k.D_Y = 0.5;
  k.sigma_x = 0.7;
  k.sigma_y = 0.3;
  k.D_tilde = 1.0;
  k.N = 10001;
  for (auto v : {ScheduleVariant::bounded_det, ScheduleVariant::unbounded_det, ScheduleVariant::bounded_stoch,
                 ScheduleVariant::unbounded_stoch}) {
    const auto s = ParamSchedule::make(v, k);
    const auto rep = validate_schedule(s, k, 10000, default_mode(v), s.p(), s.q());
    expect(rep.pass && rep.t_checked == 10000);
  }
  const int sched_fail = failures - geo_fail;

  // oracle second moments against the declared budgets
  auto p = std::make_shared<const SaddlePointProblem>(generate_problem("matrix_game", {{"m", 5}, {"n", 4}}, 3));
  for (auto model : {NoiseModel::gaussian, NoiseModel::bounded_uniform}) {
    StochasticOracle o(p, NoiseSpec::from_totals(model, 0.6, 0.4), 17, true);
    const Vec x = p->set_x.center_point(), y = p->set_y.center_point();
    double sg = 0, sk = 0, sy = 0;
    Vec mean_g = Vec::Zero(5);
    const int m = 20000;
    for (int i = 0; i < m; ++i) {
      const auto smp = o.sample(x, y);
      sg += smp.noise->grad_noise.squaredNorm();
      sy += smp.noise->kx_noise.squaredNorm();
      sk += smp.noise->kty_noise.squaredNorm();
      mean_g += smp.noise->grad_noise;
    }
    const NoiseSpec& ns = o.noise();
    expect(sg / m <= ns.sigma_xG * ns.sigma_xG * 1.05);
    expect(sk / m <= ns.sigma_xK * ns.sigma_xK * 1.05);
    expect(sy / m <= ns.sigma_y * ns.sigma_y * 1.05);
    expect((mean_g / m).norm() <= 5 * ns.sigma_xG / std::sqrt(static_cast<double>(m)));
  }
  const int oracle_fail = failures - geo_fail - sched_fail;

  r.pass = failures == 0;
  r.data = {{"geometry_failures", geo_fail}, {"schedule_failures", sched_fail}, {"oracle_failures", oracle_fail}};
  r.detail = "geometry " + std::to_string(geo_fail) + " failures, schedules " + std::to_string(sched_fail) +
             " failures, oracle " + std::to_string(oracle_fail) + " failures";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  std::map<int, CriterionResult> results;
  auto add = [&](const CriterionResult& c) {
    auto it = results.find(c.id);
    if (it == results.end()) {
      results.emplace(c.id, c);
    } else {
      it->second.pass = it->second.pass && c.pass;
      it->second.detail += "; " + c.detail;
    }
  };
  for (const auto& suite : bench_suites()) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& c : run_bench(suite, quick)) add(c);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("# suite %s finished in %.2f s\n", suite.c_str(), sec);
  }
  add(audit_criterion());
  add(property_criterion());

  bool all = true;
  for (int id = 1; id <= 9; ++id) {
    const auto it = results.find(id);
    if (it == results.end()) {
      std::printf("criterion %d: FAIL - not run\n", id);
      all = false;
      continue;
    }
    const auto& c = it->second;
    std::printf("criterion %d [%s]: %s - %s\n", id, c.name.c_str(), c.pass ? "PASS" : "FAIL", c.detail.c_str());
    all = all && c.pass;
  }
  return all ? 0 : 1;
}
