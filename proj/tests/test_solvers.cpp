#include <doctest.h>

#include <cmath>
#include <memory>

#include "apd/errors.hpp"
#include "apd/harness.hpp"
#include "apd/solvers.hpp"

using namespace apd;

namespace {

Vec v1(double a) { return (Vec(1) << a).finished(); }

// X = Y = [-1, 1], G = x^2/2, K = 1, J = 0.
SaddlePointProblem one_d() {
  return make_problem(SmoothTerm::quadratic(Mat::Identity(1, 1), Vec::Zero(1)), 1.0, LinearOperator::identity(1),
                      1.0, SimpleTerm::zero(1), SetDescriptor::box(v1(-1), v1(1)), SetDescriptor::box(v1(-1), v1(1)));
}

ParamSchedule one_d_schedule() {
  ScheduleConstants c;
  c.L_G = 1.0;
  c.L_K = 1.0;
  c.D_X = 1.0;
  c.D_Y = 1.0;
  return ParamSchedule::make(ScheduleVariant::bounded_det, c);
}

ParamSchedule flat(int n, double eta, double tau, double lg, double lk) {
  const auto v = [n](double x) { return std::vector<double>(static_cast<std::size_t>(n), x); };
  const auto s = ParamSchedule::custom(v(1.0), v(1.0), v(eta), v(tau));
  ScheduleConstants k;
  k.L_G = lg;
  k.L_K = lk;
  const auto rep = validate_schedule(s, k, n - 1, ValidationMode::baseline);
  REQUIRE(rep.pass);
  return s.certify(rep);
}

SolverState start_1d() { return initial_state(one_d(), PointPair{v1(1), v1(0)}); }

}  // namespace

TEST_CASE("apd_step on the 1-D instance") {
  const auto p = one_d();
  const auto s = one_d_schedule();
  CHECK(s.eta(1) == doctest::Approx(1.0 / 3));
  CHECK(s.tau(1) == doctest::Approx(1.0));
  const SolverState st = start_1d();
  CHECK(st.x_bar(0) == 1.0);
  const SolverState n = apd_step(st, p, s);
  CHECK(n.t == 2);
  CHECK(n.y(0) == doctest::Approx(1.0));
  CHECK(n.x(0) == doctest::Approx(1.0 / 3));
  CHECK(n.x_ag(0) == doctest::Approx(1.0 / 3));
  CHECK(n.y_ag(0) == doctest::Approx(1.0));
}

TEST_CASE("stationary point with K = 0 and zero gradient") {
  const auto p = make_problem(SmoothTerm::zero(2), 0.0, LinearOperator::dense(Mat::Zero(2, 2)), 0.0,
                              SimpleTerm::zero(2), SetDescriptor::free(2), SetDescriptor::free(2));
  const auto s = flat(30, 0.7, 0.9, 0.0, 0.0);
  SolverState st = initial_state(p, PointPair{Vec::Constant(2, 0.3), Vec::Constant(2, -1.2)});
  const SolverState first = st;
  for (int t = 1; t < 30; ++t) {
    st = apd_step(st, p, s);
    CHECK(st.x == first.x);
    CHECK(st.y == first.y);
  }
}

TEST_CASE("beta = 1 step equals a linearized primal-dual step") {
  const auto p = generate_problem("quad_bilinear", {{"n", 4}, {"m", 3}, {"L_G", 1.0}, {"L_K", 1.0}}, 3);
  const auto s = flat(10, 0.5, 0.5, 1.0, 1.0);
  SolverState a = initial_state(p), b = a;
  for (int t = 1; t < 10; ++t) {
    a = apd_step(a, p, s);
    b = pd_baseline_step(b, p, s, true);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
  }
}

TEST_CASE("zero-noise stochastic step is identical to the deterministic step") {
  auto p = std::make_shared<const SaddlePointProblem>(generate_problem("matrix_game", {{"m", 4}, {"n", 3}}, 9));
  ScheduleConstants c = problem_constants(*p);
  c.N = 1001;
  const auto s = ParamSchedule::make(ScheduleVariant::bounded_stoch, c);
  StochasticOracle o(p, NoiseSpec{}, 4, false);
  SolverState a = initial_state(*p), b = a;
  for (int t = 1; t <= 1000; ++t) {
    a = apd_step(a, *p, s);
    b = stochastic_apd_step(b, *p, o, s);
    REQUIRE(a.x == b.x);
    REQUIRE(a.y == b.y);
    REQUIRE(a.x_ag == b.x_ag);
  }
  CHECK(!b.aux);
}

TEST_CASE("disclosure off leaves the auxiliary sequence unset") {
  auto p = std::make_shared<const SaddlePointProblem>(generate_problem("matrix_game", {{"m", 3}, {"n", 3}}, 9));
  ScheduleConstants c = problem_constants(*p);
  c.N = 50;
  c.sigma_x = c.sigma_y = 0.3;
  const auto s = ParamSchedule::make(ScheduleVariant::bounded_stoch, c);
  StochasticOracle hidden(p, NoiseSpec::from_totals(NoiseModel::gaussian, 0.3, 0.3), 4, false);
  StochasticOracle shown(p, NoiseSpec::from_totals(NoiseModel::gaussian, 0.3, 0.3), 4, true);
  SolverState a = initial_state(*p), b = a;
  for (int t = 1; t < 50; ++t) {
    a = stochastic_apd_step(a, *p, hidden, s);
    b = stochastic_apd_step(b, *p, shown, s);
  }
  CHECK(!a.aux);
  REQUIRE(b.aux);
  CHECK(b.aux->u_accum);
  CHECK(a.x == b.x);
  CHECK(p->set_x.contains(b.aux->x_v));
}

TEST_CASE("injected dual noise at t = 1 is clipped") {
  const auto p = one_d();
  NoiseRealization n{Vec::Zero(1), v1(0.1), Vec::Zero(1)};
  const SolverState st = apd_step_with_noise(start_1d(), p, one_d_schedule(), n, false);
  CHECK(st.y(0) == 1.0);
}

TEST_CASE("pd_baseline linearized example and the exact variant") {
  const auto p = one_d();
  const auto s = flat(5, 0.5, 0.5, 1.0, 1.0);
  const SolverState lin = pd_baseline_step(start_1d(), p, s, true);
  CHECK(lin.y(0) == doctest::Approx(0.5));
  CHECK(lin.x(0) == doctest::Approx(0.25));
  const SolverState ex = pd_baseline_step(start_1d(), p, s, false);
  CHECK(ex.y(0) == doctest::Approx(0.5));
  CHECK(ex.x(0) == doctest::Approx(0.5));
  CHECK(ex.x(0) != lin.x(0));

  const auto sp = make_problem(SmoothTerm::softplus(1, 1.0), 0.25, LinearOperator::identity(1), 1.0,
                               SimpleTerm::zero(1), SetDescriptor::box(v1(-1), v1(1)),
                               SetDescriptor::box(v1(-1), v1(1)));
  CHECK_THROWS_AS(pd_baseline_step(initial_state(sp), sp, s, false), UnsupportedEvaluation);
}

TEST_CASE("pd_baseline on a 2x2 game keeps averages in the simplex") {
  const Mat k = (Mat(2, 2) << 1, -1, -1, 1).finished();
  const auto p = make_problem(SmoothTerm::zero(2), 0.0, LinearOperator::dense(k), 2.0, SimpleTerm::zero(2),
                              SetDescriptor::simplex(2), SetDescriptor::simplex(2));
  const auto s = flat(200, 0.4, 0.4, 0.0, 2.0);
  CHECK(0.4 * 0.4 * 4 < 1);
  SolverState st = initial_state(p, PointPair{(Vec(2) << 0.9, 0.1).finished(), (Vec(2) << 0.2, 0.8).finished()});
  for (int t = 1; t < 200; ++t) {
    st = pd_baseline_step(st, p, s, true);
    CHECK(p.set_x.contains(st.x_ag));
    CHECK(p.set_y.contains(st.y_ag));
  }
}

TEST_CASE("run contracts") {
  const auto p = generate_problem("matrix_game", {{"m", 5}, {"n", 4}}, 1);
  ScheduleConstants c = problem_constants(p);
  c.N = 101;
  const auto s = ParamSchedule::make(ScheduleVariant::bounded_det, c);

  const Trajectory one = run(Algorithm::apd, p, nullptr, s, 2);
  CHECK(one.records.size() == 1);
  const SolverState st = apd_step(initial_state(p), p, s);
  CHECK(one.final_state.x == st.x);
  CHECK(one.final_state.y == st.y);

  CaptureOptions cap;
  cap.cadence = 10;
  const Trajectory tr = run(Algorithm::apd, p, nullptr, s, 101, cap);
  CHECK(tr.records.size() == 100);
  int gaps = 0;
  for (const auto& r : tr.records) gaps += r.gap.has_value();
  CHECK(gaps == 10);
  cap.cadence = 7;
  const Trajectory tr7 = run(Algorithm::apd, p, nullptr, s, 101, cap);
  int rows = 0;
  for (const auto& r : tr7.records) rows += r.captured;
  CHECK(rows == (100 + 6) / 7);

  CHECK_THROWS_AS(run(Algorithm::apd, p, nullptr, s, 1), InvalidArgument);
  CHECK_THROWS_AS(run(Algorithm::stochastic_apd, p, nullptr, s, 5), InvalidArgument);
}

TEST_CASE("runs are deterministic given the seed") {
  auto p = std::make_shared<const SaddlePointProblem>(generate_problem("matrix_game", {{"m", 5}, {"n", 5}}, 2));
  ScheduleConstants c = problem_constants(*p);
  c.N = 300;
  c.sigma_x = c.sigma_y = 0.5;
  const auto s = ParamSchedule::make(ScheduleVariant::bounded_stoch, c);
  const auto spec = NoiseSpec::from_totals(NoiseModel::bounded_uniform, 0.5, 0.5);
  StochasticOracle o1(p, spec, 17, false), o2(p, spec, 17, false), o3(p, spec, 18, false);
  const auto a = run(Algorithm::stochastic_apd, *p, &o1, s, 300);
  const auto b = run(Algorithm::stochastic_apd, *p, &o2, s, 300);
  const auto d = run(Algorithm::stochastic_apd, *p, &o3, s, 300);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.final_state.x == b.final_state.x);
  CHECK(a.to_csv() != d.to_csv());
}

TEST_CASE("step errors end the run with a partial trajectory") {
  const auto p = one_d();
  const auto s = flat(6, 0.5, 0.5, 1.0, 1.0);
  const Trajectory tr = run(Algorithm::apd, p, nullptr, s, 10);
  CHECK(tr.failed);
  CHECK(tr.records.size() == 5);
  CHECK(tr.failure.find("horizon") != std::string::npos);
  SolverState st = initial_state(p);
  st.t = 6;
  CHECK_THROWS_AS(apd_step(st, p, s), HorizonError);
}

TEST_CASE("unvalidated custom schedules are refused") {
  const auto p = one_d();
  const auto s = ParamSchedule::custom({1, 1, 1}, {1, 1, 1}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1});
  CHECK_THROWS_AS(apd_step(initial_state(p), p, s), InvalidArgument);
}

TEST_CASE("property: aggregate identity and feasibility along runs") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto p = std::make_shared<const SaddlePointProblem>(
        generate_problem(seed % 2 ? "quad_bilinear" : "matrix_game",
                         {{"m", 4}, {"n", 5}, {"L_G", 3.0}, {"L_K", 2.0}}, seed));
    ScheduleConstants c = problem_constants(*p);
    c.N = 400;
    c.sigma_x = c.sigma_y = 0.2;
    const auto s = ParamSchedule::make(ScheduleVariant::bounded_stoch, c);
    StochasticOracle o(p, NoiseSpec::from_totals(NoiseModel::gaussian, 0.2, 0.2), seed, true);
    SolverState st = initial_state(*p);
    for (int t = 1; t < 400; ++t) {
      st = stochastic_apd_step(st, *p, o, s);
      CHECK(aggregate_identity_residual(st, s) <= 1e-10);
      CHECK(p->set_x.contains(st.x));
      CHECK(p->set_y.contains(st.y));
      CHECK(p->set_x.contains(st.x_ag));
      CHECK(p->set_y.contains(st.y_ag));
    }
  }
}

TEST_CASE("initial state defaults to the set centers and checks feasibility") {
  const auto p = generate_problem("matrix_game", {{"m", 4}, {"n", 2}}, 1);
  const SolverState st = initial_state(p);
  CHECK(st.x.isApproxToConstant(0.25));
  CHECK(st.y.isApproxToConstant(0.5));
  CHECK(st.x_prev == st.x);
  CHECK_THROWS_AS(initial_state(p, PointPair{Vec::Ones(4), Vec::Constant(2, 0.5)}), InfeasibleError);
}

TEST_CASE("trajectory CSV layout") {
  const auto p = generate_problem("matrix_game", {{"m", 3}, {"n", 3}}, 1);
  ScheduleConstants c = problem_constants(p);
  c.N = 4;
  const auto s = ParamSchedule::make(ScheduleVariant::bounded_det, c);
  const std::string csv = run(Algorithm::apd, p, nullptr, s, 4).to_csv();
  CHECK(csv.rfind("t,gap,bound,delta,v_norm,dist_to_saddle,wall_ms\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.find("\n2,") != std::string::npos);
  CHECK(csv.find(",,,,\n") != std::string::npos);  // delta, v_norm, dist, wall empty
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3)) == 1.0 / 3);
}
