/// @file norms.hpp
/// @brief Spatial norms (H^s, hat-Besov b^s_{p,inf}, Fourier-Lebesgue FL^{s,p}),
/// discrete space-time Bourgain-type norms over a trajectory window, and the
/// cubic resonance identities.
///
/// Weights use <n> = 1 + |n|. Dyadic block j >= 0 holds 2^j <= |n| < 2^{j+1},
/// both signs of n included.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wnlab/field.hpp"

namespace wnlab {

enum class NormFamily { sobolev, besov_hat, fourier_lebesgue, xsb, xsbpq };

std::string to_string(NormFamily family);
NormFamily norm_family_from_string(const std::string& name);

struct NormSpec {
  NormFamily family = NormFamily::sobolev;
  double s = 0.0;
  double b = 0.0;
  double p = 2.0;  ///< may be +infinity
  double q = 2.0;  ///< xsbpq only; may be +infinity

  void validate() const;
};

/// Snapshots at t = 0, dt, 2dt, ... sharing one cutoff.
struct Trajectory {
  double dt = 0.0;
  std::vector<FourierField> fields;

  double duration() const noexcept {
    return fields.empty() ? 0.0 : dt * static_cast<double>(fields.size() - 1);
  }
  void validate() const;
};

double spatial_norm(const FourierField& u, const NormSpec& spec);

/// Discrete surrogate of X^{s,b} / X^{s,b}_{p,q} on the window [0, T).
///
/// The first K = fields.size() - 1 snapshots are treated as one period of
/// length T = K dt. Per mode, u~(n, tau_k) = dt sum_j u(n, t_j) e^{-i tau_k t_j}
/// with tau_k = 2 pi k / T; the K representatives k are taken centered on the
/// dispersion frequency n^3, so free Airy evolution lands on its own band.
/// L^2_tau carries the measure dtau / 2pi (discrete: 1/T per grid point), which
/// makes the b = 0 norm equal (dt sum_j ||u(t_j)||_{H^s}^2)^{1/2}.
double xsb_norm(const Trajectory& traj, const NormSpec& spec);

/// n^3 - n1^3 - n2^3 with n = n1 + n2, in factored form 3 n n1 n2.
constexpr std::int64_t resonance3(std::int64_t n1, std::int64_t n2) noexcept {
  return 3 * (n1 + n2) * n1 * n2;
}

/// n^3 - n2^3 - n3^3 - n4^3 with n = n2 + n3 + n4, in factored form
/// 3 (n2 + n3)(n3 + n4)(n4 + n2).
constexpr std::int64_t resonance4(std::int64_t n2, std::int64_t n3, std::int64_t n4) noexcept {
  return 3 * (n2 + n3) * (n3 + n4) * (n4 + n2);
}

/// CSV rows (sample_id, family, s, b, p, q, value).
struct NormRecord {
  std::size_t sample_id = 0;
  NormSpec spec;
  double value = 0.0;
};
void write_norms_csv(std::ostream& os, std::span<const NormRecord> rows);

}  // namespace wnlab
