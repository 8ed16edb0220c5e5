/// @file stats.hpp
/// @brief Order-stable accumulation and the small set of statistics the
/// experiments report (batch-means errors, Bonferroni thresholds, DKW bands,
/// Gamma survival, least-squares fits).
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace wnlab::stats {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double sum(std::span<const double> xs) noexcept;
double mean(std::span<const double> xs);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Mean with batch-means standard error over `batches` contiguous batches
/// (falls back to one value per batch when there are fewer samples).
Estimate batch_mean(std::span<const double> xs, std::size_t batches = 50);

/// Mean of complex values; the error is sqrt(se_re^2 + se_im^2) from batch means.
struct ComplexEstimate {
  std::complex<double> value;
  double std_error = 0.0;
};
ComplexEstimate batch_mean(std::span<const std::complex<double>> xs, std::size_t batches = 50);

/// Two-sided z threshold giving the family-wise error rate of a single
/// `base_sigma`-sigma test, Bonferroni-split across `tests` tests.
double bonferroni_z(std::size_t tests, double base_sigma = 3.0);

/// Dvoretzky-Kiefer-Wolfowitz half-width for `n` samples at `confidence`.
double dkw_bound(std::size_t n, double confidence);

/// P[Gamma(k, 1) >= x] (regularized upper incomplete gamma).
double gamma_survival(double k, double x);

/// Sample quantile (type 7, linear interpolation), `q` in [0, 1].
double quantile(std::vector<double> xs, double q);

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
};
/// Ordinary least squares y = intercept + slope * x; needs >= 2 distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace wnlab::stats
