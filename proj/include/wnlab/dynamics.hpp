/// @file dynamics.hpp
/// @brief Galerkin-truncated KdV / mKdV flows and stochastic KdV with
/// additive space-time white noise.
///
/// Sign conventions (u = sum u_n e^{inx}, normalized circle):
///   KdV   u_t + u_xxx + u u_x = 0       du_n/dt = i n^3 u_n - (i n / 2) (u^2)_n
///   mKdV  u_t + u_xxx +- u^2 u_x = 0    du_n/dt = i n^3 u_n -+ (i n / 3) (u^3)_n
/// (+ focusing, - defocusing). The free flow is u_n(t) = e^{i n^3 t} u_n(0).
/// Products are formed on a zero-padded grid (>= 3N+1 points for KdV, >= 4N+1
/// for mKdV) so the truncated nonlinearity carries no aliasing error.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wnlab/field.hpp"
#include "wnlab/norms.hpp"
#include "wnlab/rng.hpp"

namespace wnlab {

enum class Equation { kdv, mkdv_focusing, mkdv_defocusing, skdv };

std::string to_string(Equation eq);
Equation equation_from_string(const std::string& name);

/// gauss4: implicit two-stage Gauss-Legendre in the interaction picture
/// (order 4, symplectic, conserves int u^2 exactly, time-symmetric).
/// rk4: classical explicit integrating-factor RK4 (Lawson).
enum class Scheme { gauss4, rk4 };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct EvolutionConfig {
  Equation equation = Equation::kdv;
  int cutoff = 16;
  double dt = 1e-3;
  double T = 1.0;
  double noise_amplitude = 0.0;  ///< skdv only
  std::uint64_t seed = 0;        ///< skdv only
  bool nonlinear = true;         ///< false: pure Airy flow
  Scheme scheme = Scheme::gauss4;

  std::size_t steps() const;
  void validate() const;
};

/// Largest dt the integrator accepts at this cutoff, calibrated on
/// white-noise data.
double max_stable_dt(Equation eq, int cutoff, Scheme scheme = Scheme::gauss4);

/// Full right-hand side (dispersion plus truncated nonlinearity).
FourierField galerkin_rhs(const FourierField& u, Equation eq);

/// KdV: H = 1/2 int u_x^2 - 1/6 int u^3; mKdV: H = 1/2 int u_x^2 -+ 1/12 int u^4.
double hamiltonian(const FourierField& u, Equation eq);

/// Integrating-factor stepper working in place on modes u_1..u_N. The
/// dispersion e^{i n^3 t} is applied exactly; only the nonlinearity is
/// discretized. With the nonlinearity off a step is a pure phase rotation.
class Stepper {
 public:
  Stepper(Equation eq, int cutoff, double dt, bool nonlinear = true,
          Scheme scheme = Scheme::gauss4);

  /// Throws IntegrationAborted (time 0) when the implicit stages cannot be
  /// resolved even after repeated step halving.
  void step(std::span<Complex> modes);
  /// Truncated nonlinearity only (no dispersion).
  void nonlinear_term(std::span<const Complex> modes, std::span<Complex> out);

  /// Largest implicit-stage iteration count seen so far.
  int max_iterations() const noexcept { return max_iterations_; }
  /// Total implicit-stage iterations (each costs two nonlinear evaluations).
  std::size_t total_iterations() const noexcept { return total_iterations_; }

 private:
  struct Phases {
    double h;
    double rate = 0.0;
    bool ready = false;
    std::vector<Complex> full, half, c1, c2;
  };
  const Phases& phases(int depth, double rate = 0.0);
  double gauge_rate(std::span<const Complex> u) const;
  void rk4_step(std::span<Complex> u, const Phases& ph);
  bool gauss_step(std::span<Complex> u, const Phases& ph);
  void stage_term(std::span<const Complex> v, std::span<Complex> out, double rate);
  void gauss_advance(std::span<Complex> u, int depth);

  Equation eq_;
  int cutoff_;
  double dt_;
  bool nonlinear_;
  Scheme scheme_;
  int power_;
  int grid_;
  int max_iterations_ = 0;
  std::size_t total_iterations_ = 0;
  int depth_ = 0;
  int calm_steps_ = 0;
  std::vector<Phases> phases_;
  std::vector<Complex> k1_, k2_, k3_, k4_, stage_;
  std::vector<Complex> anderson_x_, anderson_g_, anderson_f_, anderson_fprev_, anderson_gprev_;
  std::vector<std::vector<Complex>> anderson_df_, anderson_dg_;
};

/// Called after every step (and once at t = 0 with step = 0).
using StepObserver = std::function<void(std::size_t step, double t, std::span<const Complex> modes)>;

/// Deterministic flow; skdv is treated as KdV with the noise ignored.
/// Throws IntegrationAborted on a non-finite state.
void integrate(const FourierField& u0, const EvolutionConfig& config, const StepObserver& observer);
Trajectory evolve(const FourierField& u0, const EvolutionConfig& config);

/// Phi_n(t + dt) = e^{i n^3 dt} Phi_n(t) + xi_n, E|xi_n|^2 = sigma^2 dt, Phi(0) = 0.
/// `stream` selects an independent path of config.seed.
Trajectory stochastic_convolution(const EvolutionConfig& config, std::uint64_t stream = 0);

/// KdV step followed by the same per-step noise increment as
/// stochastic_convolution. With sigma = 0 it reproduces evolve bit for bit.
void integrate_skdv(const FourierField& u0, const EvolutionConfig& config,
                    const StepObserver& observer, std::uint64_t stream = 0);
Trajectory evolve_skdv(const FourierField& u0, const EvolutionConfig& config,
                       std::uint64_t stream = 0);

/// u(x) -> u(-x), i.e. conjugated coefficients. The flows are invariant under
/// (x, t) -> (-x, -t), so reflect . evolve . reflect runs time backwards.
FourierField reflect(const FourierField& u);

/// JSONL: header line {"header": {...}} then {"t": t, "field": {...}} per snapshot.
void write_trajectory_jsonl(std::ostream& os, const EvolutionConfig& config, const Trajectory& traj);
Trajectory read_trajectory_jsonl(std::istream& is);

}  // namespace wnlab
