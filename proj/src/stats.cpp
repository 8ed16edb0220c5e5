#include "wnlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "wnlab/error.hpp"

namespace wnlab::stats {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x))
    comp_ += (sum_ - t) + x;
  else
    comp_ += (x - t) + sum_;
  sum_ = t;
}

double sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("mean of empty sample");
  return sum(xs) / static_cast<double>(xs.size());
}

Estimate batch_mean(std::span<const double> xs, std::size_t batches) {
  if (xs.empty()) throw InvalidArgument("batch_mean of empty sample");
  const std::size_t n = xs.size();
  const double m = mean(xs);
  const std::size_t b = std::min(batches, n);
  if (b < 2) return {m, 0.0};
  std::vector<double> means;
  means.reserve(b);
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t lo = k * n / b;
    const std::size_t hi = (k + 1) * n / b;
    means.push_back(mean(xs.subspan(lo, hi - lo)));
  }
  CompensatedSum ss;
  for (double x : means) ss.add((x - m) * (x - m));
  const double var_of_batch_mean = ss.value() / static_cast<double>(b - 1);
  return {m, std::sqrt(var_of_batch_mean / static_cast<double>(b))};
}

ComplexEstimate batch_mean(std::span<const std::complex<double>> xs, std::size_t batches) {
  std::vector<double> re(xs.size()), im(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    re[k] = xs[k].real();
    im[k] = xs[k].imag();
  }
  const auto r = batch_mean(re, batches);
  const auto i = batch_mean(im, batches);
  return {{r.value, i.value}, std::hypot(r.std_error, i.std_error)};
}

double bonferroni_z(std::size_t tests, double base_sigma) {
  const boost::math::normal_distribution<double> unit;
  const double alpha = 2.0 * boost::math::cdf(boost::math::complement(unit, base_sigma));
  const double per_test = alpha / static_cast<double>(std::max<std::size_t>(tests, 1));
  return boost::math::quantile(boost::math::complement(unit, per_test / 2.0));
}

double dkw_bound(std::size_t n, double confidence) {
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n)));
}

double gamma_survival(double k, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(k, x);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw InvalidArgument("quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("least_squares needs >= 2 paired points");
  const double mx = mean(x);
  const double my = mean(y);
  CompensatedSum sxx, sxy;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx.add((x[k] - mx) * (x[k] - mx));
    sxy.add((x[k] - mx) * (y[k] - my));
  }
  if (sxx.value() <= 0.0) throw InvalidArgument("least_squares: x values are all equal");
  const double slope = sxy.value() / sxx.value();
  return {my - slope * mx, slope};
}

}  // namespace wnlab::stats
