/// @file experiments.hpp
/// @brief Monte Carlo experiments with pass/fail verdicts.
///
/// Every experiment draws sample j of cell c from stream cell_stream(c, j) of
/// its seed and reduces per-sample values in index order, so a report depends
/// only on its config and never on the worker count. Standard errors are batch
/// means; z thresholds are Bonferroni-corrected 3 sigma unless stated.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "wnlab/dynamics.hpp"
#include "wnlab/field.hpp"
#include "wnlab/norms.hpp"
#include "wnlab/report.hpp"

namespace wnlab {

/// Five smooth test functions with small frequency support (cutoff >= 5).
std::vector<TestFunction> default_test_functions(int cutoff);

struct InvarianceConfig {
  Equation equation = Equation::kdv;
  int cutoff = 16;
  double T = 1.0;
  double dt = 1e-3;
  Scheme scheme = Scheme::gauss4;
  bool nonlinear = true;
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  std::vector<TestFunction> test_functions;  ///< empty: default set
  std::vector<int> modes;                    ///< empty: 1..N
  double sigma = 3.0;
  double drift_tolerance = 1e-8;
  std::size_t workers = 0;
};

struct ConvergenceConfig {
  int p = 4;
  std::vector<double> betas = {1e-1, 1e-2, 1e-3, 1e-4};
  double K = 10.0;
  int cutoff = 16;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::vector<TestFunction> test_functions;  ///< empty: two single-mode functions
  double tolerance = 0.05;
  double sigma = 3.0;
  double min_ess = 10.0;
  std::size_t workers = 0;
};

struct TailConfig {
  int block = 16;  ///< dyadic M: modes M <= |n| < 2M
  std::vector<double> radii;  ///< empty: 0, 0.25, ..., 10
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  double confidence = 0.99;
  double sharpness_floor = 0.95;
  double fit_exponent = 0.55;  ///< exponential fit over R >= M^fit_exponent
  std::size_t min_count = 20;
  std::size_t workers = 0;
};

struct DecayConfig {
  std::vector<int> blocks = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  double delta = 0.5;
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::optional<double> final_tolerance = 0.2;
  double sigma = 3.0;
  std::size_t workers = 0;
};

struct MomentsConfig {
  std::vector<double> betas = {1e-2, 1e-3};
  std::vector<int> cutoffs;  ///< empty: ceil(10 beta^{-1/2}) per beta
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  double relative_tolerance = 0.05;
  double constancy_tolerance = 0.10;
  double reference_constant = 3.141592653589793;  ///< limit of sqrt(beta) E[(int :u^2:)^2]
  double reference_tolerance = 0.10;
  double wick4_bound = 12.0 * 3.141592653589793 * 3.141592653589793 * 3.141592653589793;
  std::vector<double> set_scales = {2.0, 4.0, 8.0};
  double sigma = 3.0;
  std::size_t workers = 0;
};

struct HyperConfig {
  std::vector<double> betas = {1e-1, 1e-2, 1e-3};
  int cutoff = 32;
  std::vector<int> q = {2, 4, 6, 8};
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  double l2_tolerance = 0.10;
  std::optional<double> ratio_constant;  ///< empty: max_beta ||Q_beta||_2 / beta^{1/4} (exact)
  double shape_bound = 4.0;
  std::size_t workers = 0;
};

struct FerniqueConfig {
  int cutoff = 256;
  double s = -0.4;
  double p = 3.0;
  std::size_t samples = 100000;
  std::uint64_t seed = 2;
  std::size_t min_count = 20;
  double tail_fraction = 0.1;  ///< fit log-survival over survival <= this
  std::size_t grid_points = 40;
  double sigma = 3.0;
  std::size_t workers = 0;
};

struct GrowthConfig {
  int cutoff = 16;
  std::vector<double> times = {1.0, 2.0, 4.0, 8.0};
  double epsilon = 0.01;
  double dt = 1e-3;
  Scheme scheme = Scheme::gauss4;
  double s = -0.4;
  double p = 3.0;
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  double slope_bound = 1.5;
  double start_tolerance = 0.05;  ///< one-step vs initial quantile
  std::optional<FerniqueConfig> fernique = FerniqueConfig{};
  std::size_t workers = 0;
};

struct SkdvConfig {
  int cutoff = 16;
  double T = 1.0;
  double dt = 1e-3;
  double noise = 1.0;
  Scheme scheme = Scheme::gauss4;
  std::size_t samples = 10000;
  std::size_t nonlinear_samples = 400;
  std::uint64_t seed = 1;
  double sigma = 3.0;
  std::size_t workers = 0;
};

ExperimentReport invariance_test(const InvarianceConfig& config);
ExperimentReport weak_convergence_test(const ConvergenceConfig& config);
ExperimentReport tail_test(const TailConfig& config);
ExperimentReport decay_ratio_test(const DecayConfig& config);
ExperimentReport moment_scaling_test(const MomentsConfig& config);
ExperimentReport hypercontractivity_test(const HyperConfig& config);
ExperimentReport growth_bound_test(const GrowthConfig& config);
ExperimentReport fernique_test(const FerniqueConfig& config);
ExperimentReport skdv_test(const SkdvConfig& config);

/// M^{1-delta} max|g|^2 / sum|g|^2 over one block of Gaussians.
double decay_ratio(std::span<const Complex> block, double delta);

/// Strict JSON config parsing: unknown keys and wrong types raise ConfigError
/// naming the key. The resolved config (defaults filled in) is echoed back.
InvarianceConfig invariance_config_from_json(const nlohmann::json& j);
ConvergenceConfig convergence_config_from_json(const nlohmann::json& j);
TailConfig tail_config_from_json(const nlohmann::json& j);
DecayConfig decay_config_from_json(const nlohmann::json& j);
MomentsConfig moments_config_from_json(const nlohmann::json& j);
HyperConfig hyper_config_from_json(const nlohmann::json& j);
GrowthConfig growth_config_from_json(const nlohmann::json& j);
FerniqueConfig fernique_config_from_json(const nlohmann::json& j);
SkdvConfig skdv_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const InvarianceConfig& c);
nlohmann::json to_json(const ConvergenceConfig& c);
nlohmann::json to_json(const TailConfig& c);
nlohmann::json to_json(const DecayConfig& c);
nlohmann::json to_json(const MomentsConfig& c);
nlohmann::json to_json(const HyperConfig& c);
nlohmann::json to_json(const GrowthConfig& c);
nlohmann::json to_json(const FerniqueConfig& c);
nlohmann::json to_json(const SkdvConfig& c);

}  // namespace wnlab
