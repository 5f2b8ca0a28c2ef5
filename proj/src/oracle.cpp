#include "apd/oracle.hpp"

#include <cmath>

#include "apd/errors.hpp"

namespace apd {

std::string to_string(NoiseModel model) {
  switch (model) {
    case NoiseModel::none: return "none";
    case NoiseModel::gaussian: return "gaussian";
    case NoiseModel::bounded_uniform: return "bounded_uniform";
  }
  return "unknown";
}

NoiseModel noise_model_from_string(const std::string& name) {
  if (name == "none") return NoiseModel::none;
  if (name == "gaussian") return NoiseModel::gaussian;
  if (name == "bounded_uniform") return NoiseModel::bounded_uniform;
  throw InvalidArgument("unknown noise model '" + name + "'");
}

NoiseSpec NoiseSpec::from_totals(NoiseModel model, double sigma_x, double sigma_y) {
  const double half = sigma_x / std::sqrt(2.0);
  return NoiseSpec{model, half, sigma_y, half};
}

StochasticOracle::StochasticOracle(std::shared_ptr<const SaddlePointProblem> base, NoiseSpec noise,
                                   std::uint64_t seed, bool disclose_noise)
    : base_(std::move(base)),
      noise_(noise),
      seed_(seed),
      disclose_(disclose_noise),
      rng_grad_(seed, 0),
      rng_kx_(seed, 1),
      rng_kty_(seed, 2) {
  if (!base_) throw InvalidArgument("oracle: null problem");
  if (!(noise.sigma_xG >= 0.0) || !(noise.sigma_y >= 0.0) || !(noise.sigma_xK >= 0.0))
    throw InvalidArgument("oracle: noise levels must be nonnegative");
}

Vec StochasticOracle::draw(CounterRng& rng, int dim, double sigma) {
  Vec n = Vec::Zero(dim);
  if (noise_.model == NoiseModel::none) return n;
  const double scale = sigma / std::sqrt(static_cast<double>(dim));
  if (noise_.model == NoiseModel::gaussian) {
    for (int i = 0; i < dim; ++i) n[i] = scale * rng.normal();
  } else {
    for (int i = 0; i < dim; ++i) n[i] = rng.uniform(-scale, scale);
  }
  return n;
}

Vec StochasticOracle::draw_grad_noise() { return draw(rng_grad_, base_->dim_x(), noise_.sigma_xG); }
Vec StochasticOracle::draw_primal_op_noise() { return draw(rng_kx_, base_->dim_y(), noise_.sigma_y); }
Vec StochasticOracle::draw_adjoint_noise() { return draw(rng_kty_, base_->dim_x(), noise_.sigma_xK); }

Vec StochasticOracle::grad(const Vec& x) { return base_->smooth.gradient(x) + draw_grad_noise(); }
Vec StochasticOracle::apply(const Vec& x) { return base_->coupling.apply(x) + draw_primal_op_noise(); }
Vec StochasticOracle::apply_adjoint(const Vec& y) {
  return base_->coupling.apply_adjoint(y) + draw_adjoint_noise();
}

OracleSample StochasticOracle::sample(const Vec& x, const Vec& y) {
  OracleSample s;
  const Vec ng = draw_grad_noise();
  const Vec nkx = draw_primal_op_noise();
  const Vec nky = draw_adjoint_noise();
  s.grad = base_->smooth.gradient(x) + ng;
  s.kx = base_->coupling.apply(x) + nkx;
  s.kty = base_->coupling.apply_adjoint(y) + nky;
  if (disclose_) s.noise = NoiseRealization{ng, nkx, nky};
  return s;
}

OracleSample sample_oracle(StochasticOracle& oracle, const Vec& x, const Vec& y) {
  return oracle.sample(x, y);
}

}  // namespace apd
