/// @file spectral.hpp
/// @brief Thin RAII layer over FFTW real transforms on uniform periodic grids.
///
/// Conventions: a mean-zero real field u(x) = sum_{0<|n|<=N} u_n e^{inx} is
/// represented by its coefficients u_1..u_N (negative modes are conjugates).
/// `synthesize` evaluates u on x_j = 2*pi*j/L; `analyze` recovers u_n = (1/L)
/// sum_j u(x_j) e^{-inx_j}. Both are exact for L >= 2N+1.
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace wnlab {

using Complex = std::complex<double>;

/// Owns FFTW buffers and plans for one real-to-complex length.
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const noexcept { return size_; }
  std::span<double> grid() noexcept { return {grid_, static_cast<std::size_t>(size_)}; }
  std::span<Complex> spectrum() noexcept;

  /// spectrum -> grid, unnormalized (u_j = sum_k c_k e^{+2 pi i jk/L}). Clobbers spectrum.
  void backward();
  /// grid -> spectrum, unnormalized.
  void forward();

 private:
  int size_;
  double* grid_;
  void* spectrum_;  // fftw_complex*
  void* forward_plan_;
  void* backward_plan_;
};

/// Owns FFTW buffers and a forward plan for one complex-to-complex length.
class ComplexDft {
 public:
  explicit ComplexDft(int size);
  ~ComplexDft();
  ComplexDft(const ComplexDft&) = delete;
  ComplexDft& operator=(const ComplexDft&) = delete;

  int size() const noexcept { return size_; }
  std::span<Complex> input() noexcept;
  std::span<const Complex> output() const noexcept;
  /// output_k = sum_j input_j e^{-2 pi i jk/L}.
  void forward();

 private:
  int size_;
  void* in_;
  void* out_;
  void* plan_;
};

/// Per-thread cache of transforms keyed by length.
RealFft& thread_fft(int size);

/// Smallest 2^a 3^b 5^c that is >= minimum.
int fft_friendly_size(int minimum);

/// Grid size on which the p-th power of a cutoff-N trigonometric polynomial
/// integrates exactly (>= p*N + 1).
int dealiased_grid_size(int cutoff, int power);

/// Fill the transform's grid with the field values of the given modes.
void synthesize(std::span<const Complex> modes, RealFft& fft);

/// Project the transform's grid onto modes 1..out.size() (normalized by 1/L).
void analyze(RealFft& fft, std::span<Complex> out);

}  // namespace wnlab
