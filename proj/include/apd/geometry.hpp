#pragma once

#include <string>

#include "apd/sets.hpp"
#include "apd/terms.hpp"

namespace apd {

enum class GeometryKind { euclidean, entropy };

std::string to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string& name);

/// Coordinates of entropy iterates are clipped to at least this value, then renormalized.
inline constexpr double kSimplexFloor = 1e-12;

/// Distance-generating function d with modulus alpha.
///   euclidean: d(x) = (alpha/2)|x|^2, V(x,u) = (alpha/2)|x-u|^2, norm l2
///   entropy:   d(x) = alpha * sum x_i log x_i on the simplex, norm l1 (dual l_inf)
struct BregmanGeometry {
  GeometryKind kind = GeometryKind::euclidean;
  double alpha = 1.0;

  static BregmanGeometry euclidean(double alpha = 1.0) { return {GeometryKind::euclidean, alpha}; }
  static BregmanGeometry entropy(double alpha = 1.0) { return {GeometryKind::entropy, alpha}; }

  double distance_generating(const Vec& x) const;
  Vec distance_gradient(const Vec& x) const;
  double norm(const Vec& x) const;
  double dual_norm(const Vec& g) const;

  friend bool operator==(const BregmanGeometry&, const BregmanGeometry&) = default;
};

/// V(x, u) = d(x) - d(u) - <grad d(u), x - u>.
double bregman_div(const BregmanGeometry& geometry, const Vec& x, const Vec& u);

/// argmin_{w in set} <g, w> + J(w) + V(w, center)/step.
/// Pass simple == nullptr for J = 0.
Vec prox_map(const BregmanGeometry& geometry, const SetDescriptor& set, const Vec& linear_term,
             const SimpleTerm* simple, const Vec& center, double step);

struct RadiusBound {
  bool unbounded = false;
  double omega_sq = 0.0;  // sup of V over pairs in the set
  bool clipped = false;   // value holds only on the floor-clipped simplex
  std::string caveat;
};

RadiusBound set_radius(const BregmanGeometry& geometry, const SetDescriptor& set);

/// D = Omega * sqrt(2/alpha); throws UnsupportedEvaluation for unbounded sets.
double diameter_constant(const BregmanGeometry& geometry, const SetDescriptor& set);

/// argmin_{w in set} 0.5 w'Mw + <g, w> for symmetric PSD M.
/// Exact for any set when M is diagonal, and for ball or free sets with a general M
/// (through its eigendecomposition).
Vec minimize_quadratic(const SetDescriptor& set, const Mat& m, const Vec& g);

}  // namespace apd
