#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "apd/problem.hpp"
#include "apd/rng.hpp"

namespace apd {

enum class NoiseModel { none, gaussian, bounded_uniform };

std::string to_string(NoiseModel model);
NoiseModel noise_model_from_string(const std::string& name);

/// Noise budgets: E|G^ - grad G|^2 <= sigma_xG^2, E|K^_x - Kx|^2 <= sigma_y^2,
/// E|K^_y - K'y|^2 <= sigma_xK^2.
///   gaussian:        per-coordinate sd sigma/sqrt(dim), so E|noise|^2 = sigma^2 exactly
///   bounded_uniform: per-coordinate uniform on [-a, a] with a = sigma/sqrt(dim), so
///                    |noise| <= sigma surely and E|noise|^2 = sigma^2/3
struct NoiseSpec {
  NoiseModel model = NoiseModel::none;
  double sigma_xG = 0.0;
  double sigma_y = 0.0;
  double sigma_xK = 0.0;

  double sigma_x() const { return std::sqrt(sigma_xG * sigma_xG + sigma_xK * sigma_xK); }

  /// Splits a primal budget sigma_x evenly between the gradient and adjoint parts.
  static NoiseSpec from_totals(NoiseModel model, double sigma_x, double sigma_y);
};

/// Realized noise of one oracle sample.
struct NoiseRealization {
  Vec grad_noise;  // G^(x) - grad G(x)
  Vec kx_noise;    // K^_x(x) - Kx, a dual-space vector
  Vec kty_noise;   // K^_y(y) - K'y
};

struct OracleSample {
  Vec grad;  // G^(x)
  Vec kx;    // K^_x(x)
  Vec kty;   // K^_y(y)
  std::optional<NoiseRealization> noise;  // present iff the oracle discloses noise
};

/// Seeded stochastic first-order oracle over a shared immutable problem.
/// Component streams: 0 for G^, 1 for K^_x, 2 for K^_y. A single instance must not be
/// used concurrently.
class StochasticOracle {
 public:
  StochasticOracle(std::shared_ptr<const SaddlePointProblem> base, NoiseSpec noise, std::uint64_t seed,
                   bool disclose_noise);

  const SaddlePointProblem& problem() const noexcept { return *base_; }
  const std::shared_ptr<const SaddlePointProblem>& problem_ptr() const noexcept { return base_; }
  const NoiseSpec& noise() const noexcept { return noise_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool disclose_noise() const noexcept { return disclose_; }

  // Next noise vector of each component; each advances only its own stream.
  Vec draw_grad_noise();
  Vec draw_primal_op_noise();
  Vec draw_adjoint_noise();

  Vec grad(const Vec& x);
  Vec apply(const Vec& x);
  Vec apply_adjoint(const Vec& y);

  /// One call of the oracle at (x, y): (G^(x), K^_x(x), K^_y(y)) and, if disclosed, the noise.
  OracleSample sample(const Vec& x, const Vec& y);

 private:
  Vec draw(CounterRng& rng, int dim, double sigma);

  std::shared_ptr<const SaddlePointProblem> base_;
  NoiseSpec noise_;
  std::uint64_t seed_;
  bool disclose_;
  CounterRng rng_grad_, rng_kx_, rng_kty_;
};

OracleSample sample_oracle(StochasticOracle& oracle, const Vec& x, const Vec& y);

}  // namespace apd
