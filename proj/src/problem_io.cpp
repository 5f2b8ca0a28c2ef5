#include "apd/problem_io.hpp"

#include <cstdio>

#include "apd/errors.hpp"

namespace apd {

using nlohmann::json;

json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

namespace {

json mat_to_json(const Mat& m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (int i = 0; i < m.rows(); ++i)
    for (int k = 0; k < m.cols(); ++k) out.push_back(m(i, k));
  return out;
}

Mat mat_from_json(const json& j, int rows, int cols) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<long>(v.size()) != static_cast<long>(rows) * cols)
    throw ConfigError("matrix data has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) m(i, k) = v[static_cast<std::size_t>(i) * cols + k];
  return m;
}

json set_to_json(const SetDescriptor& s) {
  json j = {{"kind", to_string(s.kind())}};
  switch (s.kind()) {
    case SetKind::box:
      j["lower"] = vec_to_json(s.lower());
      j["upper"] = vec_to_json(s.upper());
      break;
    case SetKind::euclidean_ball:
      j["center"] = vec_to_json(s.center());
      j["radius"] = s.radius();
      break;
    default: break;
  }
  return j;
}

SetDescriptor set_from_json(const json& j, int dim) {
  const SetKind k = set_kind_from_string(j.at("kind").get<std::string>());
  switch (k) {
    case SetKind::box: return SetDescriptor::box(vec_from_json(j.at("lower")), vec_from_json(j.at("upper")));
    case SetKind::euclidean_ball: {
      Vec c = j.contains("center") ? vec_from_json(j.at("center")) : Vec::Zero(dim);
      return SetDescriptor::ball(std::move(c), j.value("radius", 1.0));
    }
    case SetKind::simplex: return SetDescriptor::simplex(dim);
    case SetKind::free: return SetDescriptor::free(dim);
  }
  throw ConfigError("unknown set kind");
}

}  // namespace

json problem_to_json(const SaddlePointProblem& p) {
  const int n = p.dim_x(), m = p.dim_y();
  json smooth = {{"kind", to_string(p.smooth.kind())}, {"L_G", p.L_G}};
  if (p.smooth.kind() == SmoothKind::quadratic)
    smooth["params"] = {{"H", mat_to_json(p.smooth.hessian())}, {"c", vec_to_json(p.smooth.linear())}};
  else if (p.smooth.kind() == SmoothKind::softplus)
    smooth["params"] = {{"scale", p.smooth.scale()}};
  else
    smooth["params"] = json::object();

  json coupling = {{"kind", to_string(p.coupling.kind())}, {"L_K", p.L_K}};
  if (p.coupling.kind() == OperatorKind::dense) coupling["data"] = mat_to_json(p.coupling.matrix());
  if (p.coupling.kind() == OperatorKind::diagonal) coupling["data"] = vec_to_json(p.coupling.diagonal_entries());

  json simple = {{"kind", to_string(p.simple.kind())}};
  if (p.simple.kind() == SimpleKind::linear) simple["b"] = vec_to_json(p.simple.coefficient());

  json j = {{"dims", {n, m}},
            {"smooth", smooth},
            {"coupling", coupling},
            {"simple", simple},
            {"sets", {{"x", set_to_json(p.set_x)}, {"y", set_to_json(p.set_y)}}},
            {"geometry",
             {{"x", {{"kind", to_string(p.geometry_x.kind)}, {"alpha", p.geometry_x.alpha}}},
              {"y", {{"kind", to_string(p.geometry_y.kind)}, {"alpha", p.geometry_y.alpha}}}}}};
  if (p.known_saddle)
    j["known_saddle"] = {{"x", vec_to_json(p.known_saddle->x)}, {"y", vec_to_json(p.known_saddle->y)}};
  return j;
}

SaddlePointProblem problem_from_json(const json& j) {
  try {
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims.size() != 2 || dims[0] <= 0 || dims[1] <= 0) throw ConfigError("dims must be [dim_x, dim_y], positive");
    const int n = dims[0], m = dims[1];

    const json& sj = j.at("smooth");
    const std::string sk = sj.value("kind", "zero");
    const json params = sj.value("params", json::object());
    SmoothTerm smooth = SmoothTerm::zero(n);
    if (sk == "quadratic")
      smooth = SmoothTerm::quadratic(mat_from_json(params.at("H"), n, n),
                                     params.contains("c") ? vec_from_json(params.at("c")) : Vec::Zero(n));
    else if (sk == "softplus")
      smooth = SmoothTerm::softplus(n, params.value("scale", 1.0));
    else if (sk != "zero")
      throw ConfigError("unknown smooth kind '" + sk + "'");

    const json& cj = j.at("coupling");
    const std::string ck = cj.value("kind", "dense");
    std::optional<LinearOperator> k;
    if (ck == "dense")
      k = LinearOperator::dense(mat_from_json(cj.at("data"), m, n));
    else if (ck == "diagonal")
      k = LinearOperator::diagonal(vec_from_json(cj.at("data")));
    else if (ck == "gradient_1d")
      k = LinearOperator::gradient_1d(n);
    else
      throw ConfigError("unknown coupling kind '" + ck + "'");

    SimpleTerm simple = SimpleTerm::zero(m);
    if (j.contains("simple") && j["simple"].value("kind", "zero") == "linear")
      simple = SimpleTerm::linear(vec_from_json(j["simple"].at("b")));

    const json& sets = j.at("sets");
    SaddlePointProblem p{std::move(smooth),
                         sj.at("L_G").get<double>(),
                         std::move(*k),
                         cj.at("L_K").get<double>(),
                         std::move(simple),
                         set_from_json(sets.at("x"), n),
                         set_from_json(sets.at("y"), m),
                         BregmanGeometry::euclidean(),
                         BregmanGeometry::euclidean(),
                         std::nullopt};
    if (j.contains("geometry")) {
      const json& g = j["geometry"];
      auto geo = [](const json& e) {
        if (e.is_string()) return BregmanGeometry{geometry_kind_from_string(e.get<std::string>()), 1.0};
        return BregmanGeometry{geometry_kind_from_string(e.value("kind", "euclidean")), e.value("alpha", 1.0)};
      };
      if (g.contains("x")) p.geometry_x = geo(g["x"]);
      if (g.contains("y")) p.geometry_y = geo(g["y"]);
    }
    if (j.contains("known_saddle") && !j["known_saddle"].is_null())
      p.known_saddle = PointPair{vec_from_json(j["known_saddle"].at("x")), vec_from_json(j["known_saddle"].at("y"))};
    p.validate();
    return p;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

json document_to_json(const ProblemDocument& doc) {
  json j = problem_to_json(doc.problem);
  j["noise"] = {{"model", to_string(doc.noise.model)},
                {"sigma_xG", doc.noise.sigma_xG},
                {"sigma_xK", doc.noise.sigma_xK},
                {"sigma_y", doc.noise.sigma_y},
                {"disclose", doc.disclose}};
  j["seed"] = doc.seed;
  return j;
}

ProblemDocument document_from_json(const json& j) {
  ProblemDocument d{problem_from_json(j), {}, 0, false};
  try {
    d.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("noise")) {
      const json& nj = j["noise"];
      const NoiseModel model = noise_model_from_string(nj.value("model", "none"));
      if (nj.contains("sigma_xG") || nj.contains("sigma_xK"))
        d.noise = NoiseSpec{model, nj.value("sigma_xG", 0.0), nj.value("sigma_y", 0.0), nj.value("sigma_xK", 0.0)};
      else
        d.noise = NoiseSpec::from_totals(model, nj.value("sigma_x", 0.0), nj.value("sigma_y", 0.0));
      d.disclose = nj.value("disclose", false);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  } catch (const Error& e) {
    throw ConfigError(std::string("noise: ") + e.what());
  }
  return d;
}

std::string problem_digest(const SaddlePointProblem& p) {
  const std::string s = problem_to_json(p).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace apd
