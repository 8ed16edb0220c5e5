/// @file measures.hpp
/// @brief Samplers for white noise, the interpolating Gaussians mu_beta and
/// mu~_beta, the L^2-cutoff Gibbs-type measures rho_beta^(p), Wick-ordered
/// functionals and the quartic "no pair, all distinct" chaos Q_beta.
///
/// Under mu_beta the coefficients are u_n = g_n / sqrt(1 + beta n^2) with g_n
/// standard complex Gaussians (E|g_n|^2 = 1). rho_beta^(p) is sampled by
/// self-normalized importance weighting of mu_beta draws with weight
/// 1{int u^2 <= K beta^{-1/2}} exp(beta int u^p).
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wnlab/field.hpp"
#include "wnlab/rng.hpp"

namespace wnlab {

enum class MeasureKind { white, mu_beta, mu_tilde_beta, rho_beta };

std::string to_string(MeasureKind kind);
MeasureKind measure_kind_from_string(const std::string& name);

struct MeasureSpec {
  MeasureKind kind = MeasureKind::white;
  double beta = 0.0;
  int p = 4;           ///< rho_beta only: 3 or 4
  double K = 10.0;     ///< rho_beta only: L^2 cutoff constant
  int cutoff = 1;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on any broken invariant, including positivity of
  /// 1 - 12 beta a_beta + beta n^2 for mu_tilde_beta.
  void validate() const;
};

nlohmann::json to_json(const MeasureSpec& spec);
/// Strict: unknown keys raise ConfigError (key paths prefixed by `prefix`).
MeasureSpec measure_spec_from_json(const nlohmann::json& j, const std::string& prefix = "");

struct WeightedSample {
  FourierField field;
  /// log of the importance weight; -infinity encodes weight exactly 0.
  double log_weight = 0.0;

  double weight() const { return std::exp(log_weight); }
};

/// Per-mode standard deviation of u_n under the Gaussian kinds
/// (rho_beta uses its mu_beta proposal).
std::vector<double> mode_scales(const MeasureSpec& spec);

/// One draw. The caller owns the stream; see Rng.
WeightedSample sample(const MeasureSpec& spec, Rng& rng);

/// Draw `count` samples using streams 0..count-1 of spec.seed.
std::vector<WeightedSample> sample_batch(const MeasureSpec& spec, std::size_t count);

/// Truncated a_beta = sum_{0<|n|<=N} 1/(1 + beta n^2).
double a_beta(double beta, int cutoff);

/// int :u^2:_beta = int u^2 - a_beta (a_beta truncated at `cutoff`).
double wick2(const FourierField& u, double beta, int cutoff);
/// int :u^4:_beta = int u^4 - 6 a_beta int u^2 + 3 a_beta^2.
double wick4(const FourierField& u, double beta, int cutoff);

/// Exact E_{mu_beta}[(int :u^2:_beta)^2] = 2 sum_{0<|n|<=N} (1 + beta n^2)^{-2}
/// (each |g_n|^2 is a unit exponential, appearing twice in int u^2).
double wick2_second_moment(double beta, int cutoff);

/// Index set of Q_beta: unordered 4-sets {n1 < n2 < n3 < n4} of nonzero
/// integers with |n_j| <= N, zero sum, no antipodal pair. Each set stands for
/// its 24 orderings.
class QuartetIndex {
 public:
  explicit QuartetIndex(int cutoff);
  int cutoff() const noexcept { return cutoff_; }
  std::size_t size() const noexcept { return sets_.size(); }
  const std::vector<std::array<int, 4>>& sets() const noexcept { return sets_; }

 private:
  int cutoff_;
  std::vector<std::array<int, 4>> sets_;
};

/// Q_beta = beta sum_{ordered admissible quadruples} prod_j g_{n_j}/sqrt(1 + beta n_j^2).
/// `gaussians` holds g_1..g_N (negative modes are conjugates).
double q_beta(const QuartetIndex& index, std::span<const Complex> gaussians, double beta);
/// Convenience overload that enumerates the index set on the fly.
double q_beta(std::span<const Complex> gaussians, double beta, int cutoff);

/// Exact ||Q_beta||_{L^2}^2 = 24 beta^2 sum_{ordered} prod_j 1/(1 + beta n_j^2).
double q_beta_second_moment(const QuartetIndex& index, double beta);

/// Self-normalized estimate sum_j w_j e^{i<f,u_j>} / sum_j w_j.
/// Throws DegenerateWeights when every weight is zero.
std::complex<double> char_functional(std::span<const WeightedSample> samples,
                                     const TestFunction& f);

/// Closed form E exp(i<f,u>) for a centered Gaussian with per-mode std `scales`:
/// exp(-sum_{n>=1} |f_n|^2 scale_n^2).
double gaussian_char_functional(std::span<const double> scales, const TestFunction& f);

/// JSONL batch: a header line {"header": {...}} followed by one
/// {"field": ..., "weight": w, "log_weight": lw} per line.
void write_samples_jsonl(std::ostream& os, const MeasureSpec& spec,
                         std::span<const WeightedSample> samples);
std::vector<WeightedSample> read_samples_jsonl(std::istream& is, MeasureSpec* spec = nullptr);

}  // namespace wnlab
