#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "apd/oracle.hpp"
#include "apd/problem.hpp"

namespace apd {

/// A problem plus the oracle settings that travel with it in a config file.
///   {"dims": [n, m],
///    "smooth": {"kind": "zero"|"quadratic"|"softplus", "params": {...}, "L_G": ...},
///    "coupling": {"kind": "dense"|"diagonal"|"gradient_1d", "data": [...row-major...], "L_K": ...},
///    "simple": {"kind": "zero"|"linear", "b": [...]},
///    "sets": {"x": {...}, "y": {...}},
///    "noise": {"model": ..., "sigma_x": ..., "sigma_y": ..., "disclose": bool},
///    "seed": ..., "known_saddle": {"x": [...], "y": [...]}, "geometry": {"x": ..., "y": ...}}
/// Set objects: {"kind": "box", "lower": [...], "upper": [...]}, {"kind": "ball", "center": [...],
/// "radius": r}, {"kind": "simplex"}, {"kind": "free"}.
struct ProblemDocument {
  SaddlePointProblem problem;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  bool disclose = false;
};

nlohmann::json problem_to_json(const SaddlePointProblem& problem);
SaddlePointProblem problem_from_json(const nlohmann::json& j);

nlohmann::json document_to_json(const ProblemDocument& doc);
/// Throws ConfigError on malformed input.
ProblemDocument document_from_json(const nlohmann::json& j);

/// 16 hex digits of FNV-1a over the compact JSON form of the problem.
std::string problem_digest(const SaddlePointProblem& problem);

nlohmann::json vec_to_json(const Vec& v);
Vec vec_from_json(const nlohmann::json& j);

}  // namespace apd
