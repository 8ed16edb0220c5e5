#include "wnlab/field.hpp"

#include <cmath>

#include "wnlab/error.hpp"

namespace wnlab {

FourierField::FourierField(int cutoff) {
  if (cutoff < 1) throw InvalidArgument("FourierField: cutoff must be >= 1");
  coeffs_.assign(static_cast<std::size_t>(cutoff), Complex{});
}

FourierField::FourierField(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw InvalidArgument("FourierField: cutoff must be >= 1");
}

Complex FourierField::coeff(int n) const noexcept {
  if (n == 0 || std::abs(n) > cutoff()) return {};
  const auto& c = coeffs_[static_cast<std::size_t>(std::abs(n) - 1)];
  return n > 0 ? c : std::conj(c);
}

FourierField single_mode(int cutoff, int n, Complex value) {
  if (n < 1 || n > cutoff) throw InvalidArgument("single_mode: mode outside 1..cutoff");
  std::vector<Complex> c(static_cast<std::size_t>(cutoff));
  c[static_cast<std::size_t>(n - 1)] = value;
  return FourierField(std::move(c));
}

double pairing(const TestFunction& f, const FourierField& u) {
  const auto fm = f.shape().modes();
  const auto um = u.modes();
  const std::size_t n = std::min(fm.size(), um.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += (fm[k] * std::conj(um[k])).real();
  return 2.0 * s;
}

double l2_squared(const FourierField& u) {
  double s = 0.0;
  for (const auto& c : u.modes()) s += std::norm(c);
  return 2.0 * s;
}

double gradient_integral(const FourierField& u) {
  double s = 0.0;
  const auto m = u.modes();
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double n = static_cast<double>(k + 1);
    s += n * n * std::norm(m[k]);
  }
  return 2.0 * s;
}

namespace {

// Coefficients of u^2 for frequencies -2N..2N, index m + 2N.
std::vector<Complex> square_coefficients(const FourierField& u) {
  const int N = u.cutoff();
  std::vector<Complex> sq(static_cast<std::size_t>(4 * N + 1));
  for (int n1 = -N; n1 <= N; ++n1) {
    if (n1 == 0) continue;
    const Complex a = u.coeff(n1);
    for (int n2 = -N; n2 <= N; ++n2) {
      if (n2 == 0) continue;
      sq[static_cast<std::size_t>(n1 + n2 + 2 * N)] += a * u.coeff(n2);
    }
  }
  return sq;
}

double integral_power_convolution(const FourierField& u, int p) {
  if (p == 2) return l2_squared(u);
  const int N = u.cutoff();
  const auto sq = square_coefficients(u);
  double s = 0.0;
  if (p == 3) {
    // int u^2 * u = sum_m (u^2)_m conj(u_m)
    for (int m = -N; m <= N; ++m)
      s += (sq[static_cast<std::size_t>(m + 2 * N)] * std::conj(u.coeff(m))).real();
  } else {
    // int (u^2)^2 = sum_m |(u^2)_m|^2
    for (const auto& c : sq) s += std::norm(c);
  }
  return s;
}

double integral_power_grid(const FourierField& u, int p) {
  auto& fft = thread_fft(dealiased_grid_size(u.cutoff(), p));
  synthesize(u.modes(), fft);
  double s = 0.0;
  for (double v : fft.grid()) s += std::pow(v, p);
  return s / fft.size();
}

}  // namespace

double integral_power(const FourierField& u, int p, FunctionalRoute route) {
  if (p < 2 || p > 4) throw InvalidArgument("integral_power: p must be 2, 3 or 4");
  return route == FunctionalRoute::convolution ? integral_power_convolution(u, p)
                                               : integral_power_grid(u, p);
}

std::vector<double> to_physical(const FourierField& u, int grid_points) {
  if (grid_points < 2 * u.cutoff() + 1)
    throw InvalidArgument("to_physical: grid_points must be >= 2N+1");
  auto& fft = thread_fft(grid_points);
  synthesize(u.modes(), fft);
  auto g = fft.grid();
  return {g.begin(), g.end()};
}

FourierField from_physical(std::span<const double> values, int cutoff) {
  if (cutoff < 1 || values.size() < static_cast<std::size_t>(2 * cutoff + 1))
    throw InvalidArgument("from_physical: need at least 2*cutoff+1 samples");
  auto& fft = thread_fft(static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), fft.grid().begin());
  std::vector<Complex> c(static_cast<std::size_t>(cutoff));
  analyze(fft, c);
  return FourierField(std::move(c));
}

nlohmann::json to_json(const FourierField& u) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : u.modes()) coeffs.push_back({c.real(), c.imag()});
  return {{"cutoff", u.cutoff()}, {"coeffs", std::move(coeffs)}};
}

FourierField field_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("cutoff") || !j.contains("coeffs"))
    throw InvalidArgument("field JSON needs 'cutoff' and 'coeffs'");
  const int N = j.at("cutoff").get<int>();
  const auto& arr = j.at("coeffs");
  if (!arr.is_array() || static_cast<int>(arr.size()) != N)
    throw InvalidArgument("field JSON: 'coeffs' must hold exactly 'cutoff' entries");
  std::vector<Complex> c;
  c.reserve(arr.size());
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2)
      throw InvalidArgument("field JSON: each coefficient is [re, im]");
    c.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return FourierField(std::move(c));
}

}  // namespace wnlab
