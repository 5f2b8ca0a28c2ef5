#pragma once

#include <cstdint>
#include <optional>

#include "apd/geometry.hpp"
#include "apd/sets.hpp"
#include "apd/terms.hpp"

namespace apd {

struct PointPair {
  Vec x;
  Vec y;
};

/// min_{x in X} max_{y in Y} G(x) + <Kx, y> - J(y).
/// Immutable once built; share freely across threads.
struct SaddlePointProblem {
  SmoothTerm smooth;
  double L_G = 0.0;
  LinearOperator coupling;
  double L_K = 0.0;
  SimpleTerm simple;
  SetDescriptor set_x;
  SetDescriptor set_y;
  BregmanGeometry geometry_x;
  BregmanGeometry geometry_y;
  std::optional<PointPair> known_saddle;

  int dim_x() const noexcept { return set_x.dim(); }
  int dim_y() const noexcept { return set_y.dim(); }

  /// Throws InvalidArgument on any dimension or constant inconsistency.
  void validate() const;
};

/// Assembles and validates a problem with Euclidean geometry on both sides.
SaddlePointProblem make_problem(SmoothTerm smooth, double L_G, LinearOperator coupling, double L_K,
                                SimpleTerm simple, SetDescriptor set_x, SetDescriptor set_y,
                                std::optional<PointPair> known_saddle = std::nullopt);

Vec apply_coupling(const SaddlePointProblem& problem, const Vec& x);
Vec apply_coupling_adjoint(const SaddlePointProblem& problem, const Vec& y);

/// Q(z~, z) = [G(x~) + <Kx~, y> - J(y)] - [G(x) + <Kx, y~> - J(y~)].
double eval_Q(const SaddlePointProblem& problem, const PointPair& z_tilde, const PointPair& z,
              double tol = 1e-9);
/// Same expression with no feasibility check.
double eval_Q_unchecked(const SaddlePointProblem& problem, const PointPair& z_tilde, const PointPair& z);

/// f(x) = G(x) + max_{y in Y} <Kx, y> - J(y).
double eval_primal(const SaddlePointProblem& problem, const Vec& x);

struct OperatorNormEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Power iteration on K'K from a seeded random start.
OperatorNormEstimate estimate_operator_norm(const LinearOperator& k, int iterations, std::uint64_t seed,
                                            double rel_tol = 1e-12);

/// Product-space distance |z - w| with |z|^2 = |x|^2 + |y|^2.
double pair_distance(const PointPair& a, const PointPair& b);

}  // namespace apd
