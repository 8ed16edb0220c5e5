#include "wnlab/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "wnlab/error.hpp"

namespace wnlab {
namespace {

// FFTW planning is not thread safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(int size) : size_(size) {
  if (size < 2) throw InvalidArgument("RealFft: size must be >= 2");
  std::lock_guard lock(planner_mutex());
  grid_ = fftw_alloc_real(static_cast<std::size_t>(size));
  auto* spec = fftw_alloc_complex(static_cast<std::size_t>(size / 2 + 1));
  spectrum_ = spec;
  forward_plan_ = fftw_plan_dft_r2c_1d(size, grid_, spec, FFTW_ESTIMATE);
  backward_plan_ = fftw_plan_dft_c2r_1d(size, spec, grid_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_free(spectrum_);
  fftw_free(grid_);
}

std::span<Complex> RealFft::spectrum() noexcept {
  return {reinterpret_cast<Complex*>(spectrum_), static_cast<std::size_t>(size_ / 2 + 1)};
}

void RealFft::backward() { fftw_execute(static_cast<fftw_plan>(backward_plan_)); }
void RealFft::forward() { fftw_execute(static_cast<fftw_plan>(forward_plan_)); }

ComplexDft::ComplexDft(int size) : size_(size) {
  if (size < 1) throw InvalidArgument("ComplexDft: size must be >= 1");
  std::lock_guard lock(planner_mutex());
  auto* in = fftw_alloc_complex(static_cast<std::size_t>(size));
  auto* out = fftw_alloc_complex(static_cast<std::size_t>(size));
  in_ = in;
  out_ = out;
  plan_ = fftw_plan_dft_1d(size, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
}

ComplexDft::~ComplexDft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(out_);
  fftw_free(in_);
}

std::span<Complex> ComplexDft::input() noexcept {
  return {reinterpret_cast<Complex*>(in_), static_cast<std::size_t>(size_)};
}

std::span<const Complex> ComplexDft::output() const noexcept {
  return {reinterpret_cast<const Complex*>(out_), static_cast<std::size_t>(size_)};
}

void ComplexDft::forward() { fftw_execute(static_cast<fftw_plan>(plan_)); }

RealFft& thread_fft(int size) {
  thread_local std::map<int, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[size];
  if (!slot) slot = std::make_unique<RealFft>(size);
  return *slot;
}

int fft_friendly_size(int minimum) {
  for (int n = std::max(minimum, 2);; ++n) {
    int m = n;
    for (int f : {2, 3, 5})
      while (m % f == 0) m /= f;
    if (m == 1) return n;
  }
}

int dealiased_grid_size(int cutoff, int power) {
  return fft_friendly_size(power * cutoff + 1);
}

void synthesize(std::span<const Complex> modes, RealFft& fft) {
  auto spec = fft.spectrum();
  if (modes.size() >= spec.size() - (fft.size() % 2 == 0 ? 1 : 0))
    throw InvalidArgument("synthesize: grid too small for cutoff");
  std::fill(spec.begin(), spec.end(), Complex{});
  std::copy(modes.begin(), modes.end(), spec.begin() + 1);
  fft.backward();
}

void analyze(RealFft& fft, std::span<Complex> out) {
  fft.forward();
  auto spec = fft.spectrum();
  const double scale = 1.0 / fft.size();
  for (std::size_t n = 1; n <= out.size(); ++n) out[n - 1] = spec[n] * scale;
}

}  // namespace wnlab
