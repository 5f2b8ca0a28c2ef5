#include <doctest.h>

#include <cmath>

#include "apd/errors.hpp"
#include "apd/geometry.hpp"
#include "apd/rng.hpp"

using namespace apd;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Vec random_vec(int n, CounterRng& rng, double scale = 1.0) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

Vec random_simplex_point(int n, CounterRng& rng) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = -std::log1p(-rng.uniform()) + 1e-3;
  return v / v.sum();
}

// Independent projections, written without the library routines.
Vec ref_project_box(const Vec& x, const Vec& lo, const Vec& hi) {
  Vec out = x;
  for (int i = 0; i < x.size(); ++i) out(i) = x(i) < lo(i) ? lo(i) : (x(i) > hi(i) ? hi(i) : x(i));
  return out;
}

Vec ref_project_ball(const Vec& x, const Vec& c, double r) {
  const double d = (x - c).norm();
  return d <= r ? x : Vec(c + (x - c) * (r / d));
}

// Simplex projection by bisection on the shift.
Vec ref_project_simplex(const Vec& x) {
  double lo = x.minCoeff() - 1.0, hi = x.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((x.array() - mid).max(0.0).sum() > 1.0 ? lo : hi) = mid;
  }
  return (x.array() - 0.5 * (lo + hi)).max(0.0).matrix();
}

std::vector<SetDescriptor> test_sets(int n) {
  return {SetDescriptor::box(-Vec::Ones(n), 2 * Vec::Ones(n)), SetDescriptor::ball(Vec::Constant(n, 0.5), 1.5),
          SetDescriptor::simplex(n), SetDescriptor::free(n)};
}

Vec random_member(const SetDescriptor& s, CounterRng& rng) {
  if (s.kind() == SetKind::simplex) return random_simplex_point(s.dim(), rng);
  return s.project(random_vec(s.dim(), rng, 2.0));
}

}  // namespace

TEST_CASE("bregman divergence examples") {
  const auto e = BregmanGeometry::euclidean();
  CHECK(bregman_div(e, v2(0.3, 0.1), v2(0.3, 0.1)) == 0.0);
  CHECK(bregman_div(e, v2(1, 0), v2(0, 0)) == doctest::Approx(0.5));
  const auto h = BregmanGeometry::entropy();
  const double kl = (1.0 / 3) * std::log(2.0 / 3) + (2.0 / 3) * std::log(4.0 / 3);
  CHECK(bregman_div(h, v2(1.0 / 3, 2.0 / 3), v2(0.5, 0.5)) == doctest::Approx(kl).epsilon(1e-12));
  CHECK(kl == doctest::Approx(0.0566).epsilon(1e-3));
  CHECK_THROWS_AS(bregman_div(h, v2(0.5, 0.5), v2(1.0, 0.0)), DomainError);
}

TEST_CASE("prox map examples") {
  const auto e = BregmanGeometry::euclidean();
  CHECK(prox_map(e, SetDescriptor::free(2), v2(1, 1), nullptr, v2(1, 0), 0.5).isApprox(v2(0.5, -0.5), 1e-15));
  const auto h = BregmanGeometry::entropy();
  const auto s = SetDescriptor::simplex(2);
  CHECK(prox_map(h, s, v2(0, 0), nullptr, v2(0.5, 0.5), 3.7).isApprox(v2(0.5, 0.5), 1e-15));
  const Vec w = prox_map(h, s, v2(std::log(2.0), 0), nullptr, v2(0.5, 0.5), 1.0);
  CHECK(w(0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(w(1) == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("prox map with linear J shifts the linear term") {
  const auto e = BregmanGeometry::euclidean();
  const auto j = SimpleTerm::linear(v2(1, -1));
  const Vec w = prox_map(e, SetDescriptor::free(2), v2(0, 0), &j, v2(0, 0), 2.0);
  CHECK(w.isApprox(v2(-2, 2)));
}

TEST_CASE("entropy prox on a non-simplex set is unsupported") {
  CHECK_THROWS_AS(prox_map(BregmanGeometry::entropy(), SetDescriptor::free(2), v2(0, 0), nullptr, v2(0.5, 0.5), 1.0),
                  UnsupportedEvaluation);
}

TEST_CASE("set radius examples") {
  const auto e = BregmanGeometry::euclidean();
  CHECK(set_radius(e, SetDescriptor::ball(Vec::Zero(3), 1.0)).omega_sq == doctest::Approx(2.0));
  CHECK(set_radius(e, SetDescriptor::box(Vec::Zero(2), Vec::Ones(2))).omega_sq == doctest::Approx(1.0));
  CHECK(set_radius(e, SetDescriptor::free(2)).unbounded);
  const auto r = set_radius(BregmanGeometry::entropy(), SetDescriptor::simplex(4));
  CHECK(r.clipped);
  CHECK(!r.caveat.empty());
  CHECK(r.omega_sq == doctest::Approx(std::log(1e12) + std::log(4.0)));
  CHECK(diameter_constant(e, SetDescriptor::ball(Vec::Zero(2), 1.0)) == doctest::Approx(2.0));
  CHECK_THROWS_AS(diameter_constant(e, SetDescriptor::free(2)), UnsupportedEvaluation);
}

TEST_CASE("property: euclidean prox equals an independent projection") {
  CounterRng rng(1, 0);
  const auto e = BregmanGeometry::euclidean();
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    const Vec lo = -Vec::Ones(n), hi = Vec::LinSpaced(n, 0.5, 2.0);
    const Vec c = Vec::Constant(n, 0.2);
    const auto box = SetDescriptor::box(lo, hi);
    const auto ball = SetDescriptor::ball(c, 0.7);
    const auto simp = SetDescriptor::simplex(n);
    const Vec g = random_vec(n, rng, 3.0);
    const double step = 0.1 + rng.uniform();
    const Vec ub = box.project(random_vec(n, rng)), ul = ball.project(random_vec(n, rng));
    const Vec us = random_simplex_point(n, rng);
    CHECK((prox_map(e, box, g, nullptr, ub, step) - ref_project_box(ub - step * g, lo, hi)).norm() <= 1e-12);
    CHECK((prox_map(e, ball, g, nullptr, ul, step) - ref_project_ball(ul - step * g, c, 0.7)).norm() <= 1e-12);
    CHECK((prox_map(e, simp, g, nullptr, us, step) - ref_project_simplex(us - step * g)).norm() <= 1e-12);
  }
}

TEST_CASE("property: prox optimality along feasible directions") {
  CounterRng rng(2, 0);
  for (auto geo : {BregmanGeometry::euclidean(), BregmanGeometry::euclidean(2.5), BregmanGeometry::entropy()}) {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + trial % 4;
      for (const auto& set : test_sets(n)) {
        if (geo.kind == GeometryKind::entropy && set.kind() != SetKind::simplex) continue;
        const Vec u = random_member(set, rng), g = random_vec(n, rng);
        const double step = 0.05 + rng.uniform();
        const Vec w = prox_map(geo, set, g, nullptr, u, step);
        CHECK(set.contains(w));
        // gradient of <g, .> + V(., u)/step at w
        const Vec grad = g + (geo.distance_gradient(w) - geo.distance_gradient(u)) / step;
        for (int d = 0; d < 50; ++d) {
          const Vec target = random_member(set, rng);
          CHECK(grad.dot(target - w) >= -1e-8 * std::max(1.0, grad.norm()));
        }
      }
    }
  }
}

TEST_CASE("property: strong convexity of the divergence") {
  CounterRng rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 5;
    const auto e = BregmanGeometry::euclidean(0.5 + rng.uniform());
    const Vec x = random_vec(n, rng), u = random_vec(n, rng);
    CHECK(bregman_div(e, x, u) >= e.alpha / 2 * (x - u).squaredNorm() - 1e-10);
    CHECK(bregman_div(e, u, u) == 0.0);
    const auto h = BregmanGeometry::entropy();
    const Vec p = random_simplex_point(n, rng), q = random_simplex_point(n, rng);
    const double nrm = h.norm(p - q);
    CHECK(bregman_div(h, p, q) >= h.alpha / 2 * nrm * nrm - 1e-10);
    CHECK(bregman_div(h, q, q) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("property: simplex outputs are normalized and nonnegative") {
  CounterRng rng(4, 0);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + i % 8;
    const auto s = SetDescriptor::simplex(n);
    const Vec g = random_vec(n, rng, 10.0);
    const Vec u = random_simplex_point(n, rng);
    for (auto geo : {BregmanGeometry::euclidean(), BregmanGeometry::entropy()}) {
      const Vec w = prox_map(geo, s, g, nullptr, u, 0.1 + 5 * rng.uniform());
      CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
      CHECK(w.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("property: prox displacement shrinks with the step") {
  CounterRng rng(5, 0);
  for (int i = 0; i < 50; ++i) {
    const int n = 3;
    for (const auto& set : test_sets(n)) {
      const auto e = BregmanGeometry::euclidean(1.0 + i % 3);
      const Vec u = random_member(set, rng), g = random_vec(n, rng);
      for (double step : {1e-3, 1e-6}) {
        const Vec w = prox_map(e, set, g, nullptr, u, step);
        CHECK((w - u).norm() <= step * e.dual_norm(g) / e.alpha + 1e-14);
      }
    }
  }
}

TEST_CASE("minimize_quadratic agrees with a brute-force check") {
  CounterRng rng(6, 0);
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + i % 3;
    Vec d(n);
    for (int k = 0; k < n; ++k) d(k) = (k == 0 && i % 4 == 0) ? 0.0 : rng.uniform() * 3;
    const Mat m = d.asDiagonal();
    const Vec g = random_vec(n, rng);
    for (const auto& set : test_sets(n)) {
      if (set.kind() == SetKind::free && d.minCoeff() == 0.0) continue;
      const Vec w = minimize_quadratic(set, m, g);
      CHECK(set.contains(w, 1e-9));
      const double fw = 0.5 * w.dot(m * w) + g.dot(w);
      for (int t = 0; t < 50; ++t) {
        const Vec z = random_member(set, rng);
        CHECK(fw <= 0.5 * z.dot(m * z) + g.dot(z) + 1e-9);
      }
    }
  }
}

TEST_CASE("minimize_quadratic on a ball with a full matrix") {
  CounterRng rng(7, 0);
  Mat a(3, 3);
  for (int i = 0; i < 9; ++i) a(i / 3, i % 3) = rng.normal();
  const Mat m = a.transpose() * a;
  const auto ball = SetDescriptor::ball(Vec::Zero(3), 0.3);
  const Vec g = random_vec(3, rng, 5.0);
  const Vec w = minimize_quadratic(ball, m, g);
  CHECK(ball.contains(w, 1e-9));
  const double fw = 0.5 * w.dot(m * w) + g.dot(w);
  for (int t = 0; t < 200; ++t) {
    const Vec z = ball.project(random_vec(3, rng));
    CHECK(fw <= 0.5 * z.dot(m * z) + g.dot(z) + 1e-9);
  }
  CHECK_THROWS_AS(minimize_quadratic(SetDescriptor::box(-Vec::Ones(3), Vec::Ones(3)), m + Mat::Ones(3, 3), g),
                  UnsupportedEvaluation);
}
