#include "apd/terms.hpp"

#include <algorithm>
#include <cmath>

#include "apd/errors.hpp"

namespace apd {

namespace {

// log(1 + e^x) without overflow.
double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(SmoothKind kind) {
  switch (kind) {
    case SmoothKind::zero: return "zero";
    case SmoothKind::quadratic: return "quadratic";
    case SmoothKind::softplus: return "softplus";
  }
  return "unknown";
}

std::string to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::dense: return "dense";
    case OperatorKind::diagonal: return "diagonal";
    case OperatorKind::gradient_1d: return "gradient_1d";
  }
  return "unknown";
}

std::string to_string(SimpleKind kind) {
  return kind == SimpleKind::zero ? "zero" : "linear";
}

SmoothTerm SmoothTerm::zero(int dim) {
  if (dim < 1) throw InvalidArgument("smooth term: dimension must be >= 1");
  return SmoothTerm(SmoothKind::zero, dim);
}

SmoothTerm SmoothTerm::quadratic(Mat hessian, Vec linear) {
  const auto n = hessian.rows();
  if (n < 1 || hessian.cols() != n || linear.size() != n)
    throw InvalidArgument("quadratic term: H must be square and match c");
  const double asym = (hessian - hessian.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, hessian.cwiseAbs().maxCoeff()))
    throw InvalidArgument("quadratic term: H must be symmetric");
  SmoothTerm g(SmoothKind::quadratic, static_cast<int>(n));
  g.hessian_ = std::move(hessian);
  g.linear_ = std::move(linear);
  return g;
}

SmoothTerm SmoothTerm::softplus(int dim, double scale) {
  if (dim < 1) throw InvalidArgument("softplus term: dimension must be >= 1");
  if (!(scale >= 0.0)) throw InvalidArgument("softplus term: scale must be nonnegative");
  SmoothTerm g(SmoothKind::softplus, dim);
  g.scale_ = scale;
  return g;
}

double SmoothTerm::value(const Vec& x) const {
  require_dim(x, dim_, "smooth term");
  switch (kind_) {
    case SmoothKind::zero: return 0.0;
    case SmoothKind::quadratic: return 0.5 * x.dot(hessian_ * x) + linear_.dot(x);
    case SmoothKind::softplus: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) s += log1p_exp(x[i]);
      return scale_ * s;
    }
  }
  return 0.0;
}

Vec SmoothTerm::gradient(const Vec& x) const {
  require_dim(x, dim_, "smooth gradient");
  switch (kind_) {
    case SmoothKind::zero: return Vec::Zero(dim_);
    case SmoothKind::quadratic: return hessian_ * x + linear_;
    case SmoothKind::softplus: {
      Vec g(dim_);
      for (int i = 0; i < dim_; ++i) g[i] = scale_ * sigmoid(x[i]);
      return g;
    }
  }
  return Vec::Zero(dim_);
}

Mat SmoothTerm::hessian() const {
  if (kind_ == SmoothKind::softplus) throw UnsupportedEvaluation("softplus term has no constant Hessian");
  return kind_ == SmoothKind::zero ? Mat::Zero(dim_, dim_) : hessian_;
}

Vec SmoothTerm::linear() const {
  if (kind_ == SmoothKind::softplus) throw UnsupportedEvaluation("softplus term is not quadratic");
  return kind_ == SmoothKind::zero ? Vec::Zero(dim_) : linear_;
}

LinearOperator LinearOperator::dense(Mat matrix) {
  if (matrix.rows() < 1 || matrix.cols() < 1) throw InvalidArgument("dense operator: empty matrix");
  LinearOperator k(OperatorKind::dense, static_cast<int>(matrix.rows()), static_cast<int>(matrix.cols()));
  k.matrix_ = std::move(matrix);
  return k;
}

LinearOperator LinearOperator::diagonal(Vec entries) {
  if (entries.size() < 1) throw InvalidArgument("diagonal operator: empty diagonal");
  const int n = static_cast<int>(entries.size());
  LinearOperator k(OperatorKind::diagonal, n, n);
  k.diag_ = std::move(entries);
  return k;
}

LinearOperator LinearOperator::identity(int n, double scale) {
  if (n < 1) throw InvalidArgument("identity operator: dimension must be >= 1");
  return diagonal(Vec::Constant(n, scale));
}

LinearOperator LinearOperator::gradient_1d(int n) {
  if (n < 2) throw InvalidArgument("gradient_1d operator: need n >= 2");
  return LinearOperator(OperatorKind::gradient_1d, n - 1, n);
}

Vec LinearOperator::apply(const Vec& x) const {
  require_dim(x, cols_, "coupling apply");
  switch (kind_) {
    case OperatorKind::dense: return matrix_ * x;
    case OperatorKind::diagonal: return diag_.cwiseProduct(x);
    case OperatorKind::gradient_1d: return x.tail(rows_) - x.head(rows_);
  }
  return Vec();
}

Vec LinearOperator::apply_adjoint(const Vec& y) const {
  require_dim(y, rows_, "coupling adjoint");
  switch (kind_) {
    case OperatorKind::dense: return matrix_.transpose() * y;
    case OperatorKind::diagonal: return diag_.cwiseProduct(y);
    case OperatorKind::gradient_1d: {
      Vec x = Vec::Zero(cols_);
      x.tail(rows_) += y;
      x.head(rows_) -= y;
      return x;
    }
  }
  return Vec();
}

Mat LinearOperator::to_dense() const {
  switch (kind_) {
    case OperatorKind::dense: return matrix_;
    case OperatorKind::diagonal: return diag_.asDiagonal();
    case OperatorKind::gradient_1d: {
      Mat m = Mat::Zero(rows_, cols_);
      for (int i = 0; i < rows_; ++i) {
        m(i, i) = -1.0;
        m(i, i + 1) = 1.0;
      }
      return m;
    }
  }
  return Mat();
}

SimpleTerm SimpleTerm::zero(int dim) {
  if (dim < 1) throw InvalidArgument("simple term: dimension must be >= 1");
  return SimpleTerm(SimpleKind::zero, Vec::Zero(dim));
}

SimpleTerm SimpleTerm::linear(Vec b) {
  if (b.size() < 1) throw InvalidArgument("simple term: empty coefficient");
  return SimpleTerm(SimpleKind::linear, std::move(b));
}

double SimpleTerm::value(const Vec& y) const {
  require_dim(y, dim(), "simple term");
  return kind_ == SimpleKind::zero ? 0.0 : b_.dot(y);
}

}  // namespace apd
