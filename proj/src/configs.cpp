#include <cmath>
#include <limits>

#include "wnlab/config.hpp"
#include "wnlab/experiments.hpp"

namespace wnlab {

namespace {

std::vector<TestFunction> read_test_functions(ConfigReader& r, const std::string& key) {
  std::vector<TestFunction> out;
  if (!r.has(key)) return out;
  const auto& arr = r.child(key);
  if (!arr.is_array()) throw ConfigError(r.path(key), "expected an array of fields");
  for (std::size_t k = 0; k < arr.size(); ++k) {
    try {
      out.emplace_back(field_from_json(arr[k]));
    } catch (const std::exception& e) {
      throw ConfigError(r.path(key) + "[" + std::to_string(k) + "]", e.what());
    }
  }
  return out;
}

nlohmann::json write_test_functions(const std::vector<TestFunction>& fs) {
  auto arr = nlohmann::json::array();
  for (const auto& f : fs) arr.push_back(to_json(f.shape()));
  return arr;
}

template <class F>
auto checked(ConfigReader& r, const std::string& key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(r.path(key), e.what());
  }
}

Equation read_equation(ConfigReader& r, const std::string& key, Equation fallback) {
  if (!r.has(key)) return fallback;
  const auto name = r.require<std::string>(key);
  return checked(r, key, [&] { return equation_from_string(name); });
}

Scheme read_scheme(ConfigReader& r) {
  if (!r.has("scheme")) return Scheme::gauss4;
  const auto name = r.require<std::string>("scheme");
  return checked(r, "scheme", [&] { return scheme_from_string(name); });
}

template <class T>
T positive(ConfigReader& r, const std::string& key, T fallback) {
  const T v = r.get<T>(key, fallback);
  if (!(v > T{0})) throw ConfigError(r.path(key), "must be positive");
  return v;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional(ConfigReader& r, const std::string& key, std::optional<double> fallback) {
  if (!r.has(key)) return fallback;
  const auto& v = r.child(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) throw ConfigError(r.path(key), "wrong type");
  return v.get<double>();
}

FerniqueConfig fernique_from(ConfigReader& r) {
  FerniqueConfig c;
  c.cutoff = positive(r, "cutoff", c.cutoff);
  c.s = r.get("s", c.s);
  c.p = positive(r, "p", c.p);
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.min_count = positive(r, "min_count", c.min_count);
  c.tail_fraction = positive(r, "tail_fraction", c.tail_fraction);
  c.grid_points = positive(r, "grid_points", c.grid_points);
  c.sigma = positive(r, "sigma", c.sigma);
  c.workers = r.get("workers", c.workers);
  if (!(c.s * c.p < -1.0)) throw ConfigError(r.path("s"), "need s * p < -1");
  r.finish();
  return c;
}

}  // namespace

InvarianceConfig invariance_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  InvarianceConfig c;
  c.equation = read_equation(r, "equation", c.equation);
  if (c.equation == Equation::skdv) throw ConfigError("equation", "must be kdv, mkdv_focusing or mkdv_defocusing");
  c.cutoff = positive(r, "cutoff", c.cutoff);
  c.T = positive(r, "T", c.T);
  c.dt = positive(r, "dt", c.dt);
  c.scheme = read_scheme(r);
  c.nonlinear = r.get("nonlinear", c.nonlinear);
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.test_functions = read_test_functions(r, "test_functions");
  c.modes = r.get("modes", c.modes);
  c.sigma = positive(r, "sigma", c.sigma);
  c.drift_tolerance = positive(r, "drift_tolerance", c.drift_tolerance);
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const InvarianceConfig& c) {
  return {{"equation", to_string(c.equation)}, {"cutoff", c.cutoff}, {"T", c.T}, {"dt", c.dt},
          {"scheme", to_string(c.scheme)}, {"nonlinear", c.nonlinear}, {"samples", c.samples},
          {"seed", c.seed}, {"test_functions", write_test_functions(c.test_functions.empty() && c.cutoff >= 5 ? default_test_functions(c.cutoff) : c.test_functions)},
          {"modes", c.modes}, {"sigma", c.sigma}, {"drift_tolerance", c.drift_tolerance}, {"workers", c.workers}};
}

ConvergenceConfig convergence_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  ConvergenceConfig c;
  c.p = r.get("p", c.p);
  if (c.p != 3 && c.p != 4) throw ConfigError("p", "must be 3 or 4");
  c.betas = r.get("betas", c.betas);
  c.K = positive(r, "K", c.K);
  c.cutoff = positive(r, "cutoff", c.cutoff);
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.test_functions = read_test_functions(r, "test_functions");
  c.tolerance = positive(r, "tolerance", c.tolerance);
  c.sigma = positive(r, "sigma", c.sigma);
  c.min_ess = r.get("min_ess", c.min_ess);
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const ConvergenceConfig& c) {
  return {{"p", c.p}, {"betas", c.betas}, {"K", c.K}, {"cutoff", c.cutoff}, {"samples", c.samples},
          {"seed", c.seed}, {"test_functions", write_test_functions(c.test_functions)},
          {"tolerance", c.tolerance}, {"sigma", c.sigma}, {"min_ess", c.min_ess}, {"workers", c.workers}};
}

TailConfig tail_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  TailConfig c;
  c.block = positive(r, "block", c.block);
  c.radii = r.get("radii", c.radii);
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.confidence = positive(r, "confidence", c.confidence);
  if (c.confidence >= 1.0) throw ConfigError("confidence", "must be < 1");
  c.sharpness_floor = r.get("sharpness_floor", c.sharpness_floor);
  c.fit_exponent = r.get("fit_exponent", c.fit_exponent);
  c.min_count = positive(r, "min_count", c.min_count);
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const TailConfig& c) {
  return {{"block", c.block}, {"radii", c.radii}, {"samples", c.samples}, {"seed", c.seed},
          {"confidence", c.confidence}, {"sharpness_floor", c.sharpness_floor},
          {"fit_exponent", c.fit_exponent}, {"min_count", c.min_count}, {"workers", c.workers}};
}

DecayConfig decay_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  DecayConfig c;
  c.blocks = r.get("blocks", c.blocks);
  c.delta = r.get("delta", c.delta);
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta", "must lie in (0, 1)");
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.final_tolerance = read_optional(r, "final_tolerance", c.final_tolerance);
  c.sigma = positive(r, "sigma", c.sigma);
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const DecayConfig& c) {
  return {{"blocks", c.blocks}, {"delta", c.delta}, {"samples", c.samples}, {"seed", c.seed},
          {"final_tolerance", optional_number(c.final_tolerance)}, {"sigma", c.sigma}, {"workers", c.workers}};
}

MomentsConfig moments_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  MomentsConfig c;
  c.betas = r.get("betas", c.betas);
  c.cutoffs = r.get("cutoffs", c.cutoffs);
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.relative_tolerance = positive(r, "relative_tolerance", c.relative_tolerance);
  c.constancy_tolerance = positive(r, "constancy_tolerance", c.constancy_tolerance);
  c.reference_constant = positive(r, "reference_constant", c.reference_constant);
  c.reference_tolerance = positive(r, "reference_tolerance", c.reference_tolerance);
  c.wick4_bound = positive(r, "wick4_bound", c.wick4_bound);
  c.set_scales = r.get("set_scales", c.set_scales);
  c.sigma = positive(r, "sigma", c.sigma);
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const MomentsConfig& c) {
  return {{"betas", c.betas}, {"cutoffs", c.cutoffs}, {"samples", c.samples}, {"seed", c.seed},
          {"relative_tolerance", c.relative_tolerance}, {"constancy_tolerance", c.constancy_tolerance},
          {"reference_constant", c.reference_constant}, {"reference_tolerance", c.reference_tolerance},
          {"wick4_bound", c.wick4_bound}, {"set_scales", c.set_scales}, {"sigma", c.sigma},
          {"workers", c.workers}};
}

HyperConfig hyper_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  HyperConfig c;
  c.betas = r.get("betas", c.betas);
  c.cutoff = positive(r, "cutoff", c.cutoff);
  c.q = r.get("q", c.q);
  for (int q : c.q)
    if (q < 2 || q % 2) throw ConfigError("q", "entries must be even integers >= 2");
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.l2_tolerance = positive(r, "l2_tolerance", c.l2_tolerance);
  c.ratio_constant = read_optional(r, "ratio_constant", c.ratio_constant);
  c.shape_bound = positive(r, "shape_bound", c.shape_bound);
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const HyperConfig& c) {
  return {{"betas", c.betas}, {"cutoff", c.cutoff}, {"q", c.q}, {"samples", c.samples}, {"seed", c.seed},
          {"l2_tolerance", c.l2_tolerance}, {"ratio_constant", optional_number(c.ratio_constant)},
          {"shape_bound", c.shape_bound}, {"workers", c.workers}};
}

FerniqueConfig fernique_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  return fernique_from(r);
}

nlohmann::json to_json(const FerniqueConfig& c) {
  return {{"cutoff", c.cutoff}, {"s", c.s}, {"p", c.p}, {"samples", c.samples}, {"seed", c.seed},
          {"min_count", c.min_count}, {"tail_fraction", c.tail_fraction}, {"grid_points", c.grid_points},
          {"sigma", c.sigma}, {"workers", c.workers}};
}

GrowthConfig growth_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  GrowthConfig c;
  c.cutoff = positive(r, "cutoff", c.cutoff);
  c.times = r.get("times", c.times);
  c.epsilon = positive(r, "epsilon", c.epsilon);
  c.dt = positive(r, "dt", c.dt);
  c.scheme = read_scheme(r);
  c.s = r.get("s", c.s);
  c.p = positive(r, "p", c.p);
  c.samples = positive(r, "samples", c.samples);
  c.seed = r.get("seed", c.seed);
  c.slope_bound = r.get("slope_bound", c.slope_bound);
  c.start_tolerance = positive(r, "start_tolerance", c.start_tolerance);
  if (r.has("fernique")) {
    const auto& f = r.child("fernique");
    if (f.is_null()) {
      c.fernique.reset();
    } else {
      ConfigReader fr(f, "fernique");
      c.fernique = fernique_from(fr);
    }
  }
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const GrowthConfig& c) {
  return {{"cutoff", c.cutoff}, {"times", c.times}, {"epsilon", c.epsilon}, {"dt", c.dt},
          {"scheme", to_string(c.scheme)}, {"s", c.s}, {"p", c.p}, {"samples", c.samples}, {"seed", c.seed},
          {"slope_bound", c.slope_bound}, {"start_tolerance", c.start_tolerance},
          {"fernique", c.fernique ? to_json(*c.fernique) : nlohmann::json(nullptr)}, {"workers", c.workers}};
}

SkdvConfig skdv_config_from_json(const nlohmann::json& j) {
  ConfigReader r(j);
  SkdvConfig c;
  c.cutoff = positive(r, "cutoff", c.cutoff);
  c.T = positive(r, "T", c.T);
  c.dt = positive(r, "dt", c.dt);
  c.noise = r.get("noise", c.noise);
  if (!(c.noise >= 0.0)) throw ConfigError("noise", "must be >= 0");
  c.scheme = read_scheme(r);
  c.samples = positive(r, "samples", c.samples);
  c.nonlinear_samples = r.get("nonlinear_samples", c.nonlinear_samples);
  c.seed = r.get("seed", c.seed);
  c.sigma = positive(r, "sigma", c.sigma);
  c.workers = r.get("workers", c.workers);
  r.finish();
  return c;
}

nlohmann::json to_json(const SkdvConfig& c) {
  return {{"cutoff", c.cutoff}, {"T", c.T}, {"dt", c.dt}, {"noise", c.noise}, {"scheme", to_string(c.scheme)},
          {"samples", c.samples}, {"nonlinear_samples", c.nonlinear_samples}, {"seed", c.seed},
          {"sigma", c.sigma}, {"workers", c.workers}};
}

}  // namespace wnlab
