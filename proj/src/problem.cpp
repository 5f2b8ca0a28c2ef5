#include "apd/problem.hpp"

#include <cmath>

#include "apd/errors.hpp"
#include "apd/rng.hpp"

namespace apd {

void SaddlePointProblem::validate() const {
  if (smooth.dim() != dim_x()) throw InvalidArgument("problem: smooth term dimension differs from dim_x");
  if (coupling.cols() != dim_x() || coupling.rows() != dim_y())
    throw InvalidArgument("problem: coupling must map dim_x to dim_y");
  if (simple.dim() != dim_y()) throw InvalidArgument("problem: simple term dimension differs from dim_y");
  if (!(L_G >= 0.0) || !std::isfinite(L_G)) throw InvalidArgument("problem: L_G must be finite and >= 0");
  if (!(L_K >= 0.0) || !std::isfinite(L_K)) throw InvalidArgument("problem: L_K must be finite and >= 0");
  if (geometry_x.kind == GeometryKind::entropy && set_x.kind() != SetKind::simplex)
    throw InvalidArgument("problem: entropy geometry on X requires a simplex");
  if (geometry_y.kind == GeometryKind::entropy && set_y.kind() != SetKind::simplex)
    throw InvalidArgument("problem: entropy geometry on Y requires a simplex");
  if (known_saddle) {
    require_dim(known_saddle->x, dim_x(), "known saddle x");
    require_dim(known_saddle->y, dim_y(), "known saddle y");
  }
}

SaddlePointProblem make_problem(SmoothTerm smooth, double L_G, LinearOperator coupling, double L_K,
                                SimpleTerm simple, SetDescriptor set_x, SetDescriptor set_y,
                                std::optional<PointPair> known_saddle) {
  SaddlePointProblem p{std::move(smooth), L_G, std::move(coupling), L_K, std::move(simple),
                       std::move(set_x), std::move(set_y), BregmanGeometry::euclidean(),
                       BregmanGeometry::euclidean(), std::move(known_saddle)};
  p.validate();
  return p;
}

Vec apply_coupling(const SaddlePointProblem& problem, const Vec& x) {
  return problem.coupling.apply(x);
}

Vec apply_coupling_adjoint(const SaddlePointProblem& problem, const Vec& y) {
  return problem.coupling.apply_adjoint(y);
}

double eval_Q_unchecked(const SaddlePointProblem& problem, const PointPair& zt, const PointPair& z) {
  const double first = problem.smooth.value(zt.x) + problem.coupling.apply(zt.x).dot(z.y) -
                       problem.simple.value(z.y);
  const double second = problem.smooth.value(z.x) + problem.coupling.apply(z.x).dot(zt.y) -
                        problem.simple.value(zt.y);
  return first - second;
}

double eval_Q(const SaddlePointProblem& problem, const PointPair& zt, const PointPair& z, double tol) {
  require_feasible(problem.set_x, zt.x, "X", tol);
  require_feasible(problem.set_y, zt.y, "Y", tol);
  require_feasible(problem.set_x, z.x, "X", tol);
  require_feasible(problem.set_y, z.y, "Y", tol);
  return eval_Q_unchecked(problem, zt, z);
}

double eval_primal(const SaddlePointProblem& problem, const Vec& x) {
  if (!problem.set_y.bounded())
    throw UnsupportedEvaluation("eval_primal: inner maximum over a free Y is unbounded in general");
  const Vec c = problem.coupling.apply(x) - problem.simple.coefficient();
  return problem.smooth.value(x) + problem.set_y.support(c);
}

OperatorNormEstimate estimate_operator_norm(const LinearOperator& k, int iterations, std::uint64_t seed,
                                            double rel_tol) {
  if (iterations < 1) throw InvalidArgument("estimate_operator_norm: iterations must be >= 1");
  CounterRng rng(seed, 0);
  Vec v(k.cols());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v.normalize();

  OperatorNormEstimate out;
  double prev = -1.0;
  for (int it = 1; it <= iterations; ++it) {
    const Vec kv = k.apply(v);
    const double est = kv.norm();  // |Kv| <= |K| for unit v, so never an overestimate
    out.value = est;
    out.iterations = it;
    if (est == 0.0) {
      // Either K = 0 or v fell into the null space; retry once along a fresh direction.
      const Vec w = k.apply_adjoint(Vec::Ones(k.rows()));
      if (w.norm() == 0.0 && k.to_dense().isZero(0.0)) {
        out.converged = true;
        return out;
      }
      v = w.norm() > 0.0 ? Vec(w / w.norm()) : Vec(Vec::Ones(k.cols()).normalized());
      continue;
    }
    if (prev >= 0.0 && std::abs(est - prev) <= rel_tol * est) {
      out.converged = true;
      return out;
    }
    prev = est;
    Vec next = k.apply_adjoint(kv);
    const double n = next.norm();
    if (n == 0.0) break;
    v = next / n;
  }
  return out;
}

double pair_distance(const PointPair& a, const PointPair& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.y - b.y).squaredNorm());
}

}  // namespace apd
