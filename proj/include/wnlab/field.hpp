/// @file field.hpp
/// @brief Truncated mean-zero real fields on the circle and exact polynomial
/// functionals on them.
///
/// The circle carries the normalized measure dx/(2 pi): every integral below
/// is an average, so that int u^2 = sum_{n != 0} |u_n|^2 and the pairing
/// <f, u> = sum_{n != 0} f_n conj(u_n) is real.
#pragma once

#include <complex>
#include <span>
#include <vector>

#include <json.hpp>

#include "wnlab/spectral.hpp"

namespace wnlab {

/// Hermitian-symmetric coefficients u_1..u_N of a real field with u_0 = 0.
/// Only n >= 1 is stored, so reality and zero mean hold by construction.
class FourierField {
 public:
  /// Zero field with the given cutoff (>= 1).
  explicit FourierField(int cutoff);
  /// Coefficients for n = 1..coeffs.size(); must be non-empty.
  explicit FourierField(std::vector<Complex> coeffs);

  int cutoff() const noexcept { return static_cast<int>(coeffs_.size()); }

  /// u_n for any integer n: zero at n = 0 and beyond the cutoff,
  /// conjugate for negative n.
  Complex coeff(int n) const noexcept;

  /// Modes 1..N; element k holds u_{k+1}.
  std::span<const Complex> modes() const noexcept { return coeffs_; }

  bool operator==(const FourierField&) const = default;

 private:
  std::vector<Complex> coeffs_;
};

/// Field whose only nonzero coefficients are u_{+-n} = value, conj(value).
FourierField single_mode(int cutoff, int n, Complex value);

/// Smooth mean-zero test function used in pairings. Same shape as a field.
class TestFunction {
 public:
  explicit TestFunction(FourierField shape) : shape_(std::move(shape)) {}
  const FourierField& shape() const noexcept { return shape_; }

 private:
  FourierField shape_;
};

/// sum_{n != 0} f_n conj(u_n); modes beyond either cutoff count as zero.
double pairing(const TestFunction& f, const FourierField& u);

/// ||u||_{L^2}^2 = sum_{n != 0} |u_n|^2.
double l2_squared(const FourierField& u);

enum class FunctionalRoute {
  padded_grid,  ///< quadrature on a grid of >= pN+1 points (exact)
  convolution,  ///< frequency-space convolution sums
};

/// Normalized integral of u^p for p in {2, 3, 4}.
double integral_power(const FourierField& u, int p,
                      FunctionalRoute route = FunctionalRoute::padded_grid);

/// int u_x^2 = sum_{n != 0} n^2 |u_n|^2.
double gradient_integral(const FourierField& u);

/// Values on x_j = 2 pi j / grid_points; requires grid_points >= 2N+1.
std::vector<double> to_physical(const FourierField& u, int grid_points);

/// Inverse of to_physical onto modes 1..cutoff; requires values.size() >= 2*cutoff+1.
FourierField from_physical(std::span<const double> values, int cutoff);

/// {"cutoff": N, "coeffs": [[re, im], ...]} for n = 1..N.
nlohmann::json to_json(const FourierField& u);
FourierField field_from_json(const nlohmann::json& j);

}  // namespace wnlab
