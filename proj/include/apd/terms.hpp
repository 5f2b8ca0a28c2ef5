#pragma once

#include <string>

#include "apd/sets.hpp"

namespace apd {

enum class SmoothKind { zero, quadratic, softplus };

/// Smooth convex G on the primal space.
///   quadratic: G(x) = 0.5 x'Hx + c'x with H symmetric PSD
///   softplus:  G(x) = s * sum_i log(1 + exp(x_i)), gradient Lipschitz with s/4
class SmoothTerm {
 public:
  static SmoothTerm zero(int dim);
  static SmoothTerm quadratic(Mat hessian, Vec linear);
  static SmoothTerm softplus(int dim, double scale);

  SmoothKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  bool is_quadratic() const noexcept { return kind_ != SmoothKind::softplus; }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;

  // Quadratic data; H = 0, c = 0 for the zero term. Throws for softplus.
  Mat hessian() const;
  Vec linear() const;
  double scale() const noexcept { return scale_; }

 private:
  SmoothTerm(SmoothKind kind, int dim) : kind_(kind), dim_(dim) {}
  SmoothKind kind_;
  int dim_;
  Mat hessian_;
  Vec linear_;
  double scale_ = 0.0;
};

enum class OperatorKind { dense, diagonal, gradient_1d };

/// Linear map K from the primal space (cols) to the dual space (rows).
/// gradient_1d(n): forward differences (Kx)_i = x_{i+1} - x_i, i < n-1, an (n-1) x n stencil.
class LinearOperator {
 public:
  static LinearOperator dense(Mat matrix);
  static LinearOperator diagonal(Vec entries);
  static LinearOperator identity(int n, double scale = 1.0);
  static LinearOperator gradient_1d(int n);

  OperatorKind kind() const noexcept { return kind_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  Vec apply(const Vec& x) const;
  Vec apply_adjoint(const Vec& y) const;
  Mat to_dense() const;

  // Storage for serialization: the matrix (dense) or the diagonal entries.
  const Mat& matrix() const noexcept { return matrix_; }
  const Vec& diagonal_entries() const noexcept { return diag_; }

 private:
  LinearOperator(OperatorKind kind, int rows, int cols) : kind_(kind), rows_(rows), cols_(cols) {}
  OperatorKind kind_;
  int rows_, cols_;
  Mat matrix_;
  Vec diag_;
};

enum class SimpleKind { zero, linear };

/// Simple convex J on the dual space: zero or J(y) = <b, y>.
/// Indicator constraints are carried by the set descriptor, so "indicator plus linear"
/// is a linear J over a constrained Y.
class SimpleTerm {
 public:
  static SimpleTerm zero(int dim);
  static SimpleTerm linear(Vec b);

  SimpleKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return static_cast<int>(b_.size()); }
  double value(const Vec& y) const;
  /// b for the linear kind, the zero vector otherwise.
  const Vec& coefficient() const noexcept { return b_; }

 private:
  SimpleTerm(SimpleKind kind, Vec b) : kind_(kind), b_(std::move(b)) {}
  SimpleKind kind_;
  Vec b_;
};

std::string to_string(SmoothKind kind);
std::string to_string(OperatorKind kind);
std::string to_string(SimpleKind kind);

}  // namespace apd
