#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "wnlab/dynamics.hpp"
#include "wnlab/error.hpp"
#include "wnlab/measures.hpp"
#include "wnlab/stats.hpp"

using namespace wnlab;
using wnlab::testing::random_field;

namespace {

const Equation kDeterministic[] = {Equation::kdv, Equation::mkdv_focusing, Equation::mkdv_defocusing};

EvolutionConfig config(Equation eq, int N, double dt, double T) {
  EvolutionConfig c;
  c.equation = eq;
  c.cutoff = N;
  c.dt = dt;
  c.T = T;
  return c;
}

FourierField white(int N, std::uint64_t seed, std::size_t index = 0) {
  MeasureSpec s;
  s.cutoff = N;
  s.seed = seed;
  Rng rng(seed, index);
  return sample(s, rng).field;
}

// smooth data: geometric decay over the first few modes
FourierField smooth(int N, double amp) {
  std::vector<Complex> c(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) c[n - 1] = amp * std::polar(std::pow(0.5, n - 1), 0.7 * n);
  return FourierField(c);
}

double max_diff(const FourierField& a, const FourierField& b) {
  double m = 0.0;
  for (int n = 1; n <= a.cutoff(); ++n) m = std::max(m, std::abs(a.coeff(n) - b.coeff(n)));
  return m;
}

double l2_inner(const FourierField& u, const FourierField& v) {
  double acc = 0.0;
  for (int n = 1; n <= u.cutoff(); ++n) acc += 2.0 * (std::conj(u.coeff(n)) * v.coeff(n)).real();
  return acc;
}

FourierField axpy(const FourierField& u, double a, const FourierField& v) {
  std::vector<Complex> c(u.modes().begin(), u.modes().end());
  for (int n = 1; n <= u.cutoff(); ++n) c[n - 1] += a * v.coeff(n);
  return FourierField(c);
}

}  // namespace

TEST_CASE("galerkin_rhs hand examples") {
  for (Equation eq : kDeterministic) {
    const auto z = galerkin_rhs(FourierField(6), eq);
    for (int n = 1; n <= 6; ++n) CHECK(z.coeff(n) == Complex(0, 0));
  }
  // kdv, u_{+-1} = 1: dispersion i at n = 1, nonlinearity -(2i/2) u_1^2 = -i at n = 2
  const auto r = galerkin_rhs(single_mode(4, 1, 1.0), Equation::kdv);
  CHECK(std::abs(r.coeff(1) - Complex(0, 1)) < 1e-14);
  CHECK(std::abs(r.coeff(2) - Complex(0, -1)) < 1e-14);
  CHECK(std::abs(r.coeff(3)) < 1e-14);
  CHECK(std::abs(r.coeff(4)) < 1e-14);
  // mkdv on cos: cos^3 = (3 cos x + cos 3x) / 4
  const auto f = galerkin_rhs(single_mode(4, 1, 0.5), Equation::mkdv_focusing);
  CHECK(std::abs(f.coeff(1) - Complex(0, 0.5 - 0.125)) < 1e-14);
  CHECK(std::abs(f.coeff(3) - Complex(0, -0.125)) < 1e-14);
  const auto d = galerkin_rhs(single_mode(4, 1, 0.5), Equation::mkdv_defocusing);
  CHECK(std::abs(d.coeff(1) - Complex(0, 0.5 + 0.125)) < 1e-14);
  CHECK(std::abs(d.coeff(3) - Complex(0, 0.125)) < 1e-14);
}

TEST_CASE("the rhs conserves L^2 and the Hamiltonian") {
  for (Equation eq : kDeterministic) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto u = random_field(16, seed);
      const auto r = galerkin_rhs(u, eq);
      const double scale = std::sqrt(l2_squared(u) * l2_squared(r));
      CHECK(std::abs(l2_inner(u, r)) <= 1e-12 * scale);
      // dH/dt along the rhs by central differences
      const double eps = 1e-6;
      const double dH = (hamiltonian(axpy(u, eps, r), eq) - hamiltonian(axpy(u, -eps, r), eq)) / (2 * eps);
      const double ref = std::abs(hamiltonian(axpy(u, eps, r), eq) - hamiltonian(u, eq)) / eps +
                         std::sqrt(l2_squared(r)) * 1e3;
      CHECK(std::abs(dH) <= 1e-6 * ref);
    }
  }
}

TEST_CASE("free flow is the exact phase rotation") {
  for (Equation eq : kDeterministic) {
    auto c = config(eq, 12, 1e-3, 1.0);
    c.nonlinear = false;
    const auto u0 = random_field(12, 3);
    const auto tr = evolve(u0, c);
    REQUIRE(tr.fields.size() == 1001);
    for (int n = 1; n <= 12; ++n) {
      const Complex expect = std::polar(1.0, double(n) * n * n * 1.0) * u0.coeff(n);
      CHECK(std::abs(tr.fields.back().coeff(n) - expect) < 1e-12);
    }
  }
}

TEST_CASE("L^2 conservation on white-noise data") {
  for (Equation eq : kDeterministic) {
    const auto u0 = white(16, 1);
    Stepper st(eq, 16, 1e-3);
    std::vector<Complex> u(u0.modes().begin(), u0.modes().end());
    for (int k = 0; k < 1000; ++k) st.step(u);
    const double drift = std::abs(l2_squared(FourierField(u)) - l2_squared(u0)) / l2_squared(u0);
    CHECK(drift <= 1e-8);
  }
}

TEST_CASE("KdV Hamiltonian drift on white-noise data at dt = 1e-3") {
  const auto u0 = white(16, 1);
  const auto tr = evolve(u0, config(Equation::kdv, 16, 1e-3, 1.0));
  const double h0 = hamiltonian(u0, Equation::kdv);
  const double drift = std::abs(hamiltonian(tr.fields.back(), Equation::kdv) - h0) / std::abs(h0);
  MESSAGE("relative H drift " << drift);
  CHECK(drift <= 1e-6);
}

TEST_CASE("fourth-order convergence under step halving") {
  for (Equation eq : kDeterministic) {
    // asymptotic regime needs dt n^3 well below 1
    const int N = 8;
    const auto u0 = smooth(N, 2.0);
    const double T = 0.25;
    const auto ref = evolve(u0, config(eq, N, 1.0 / 12800, T)).fields.back();
    const double e1 = max_diff(evolve(u0, config(eq, N, 1.0 / 1600, T)).fields.back(), ref);
    const double e2 = max_diff(evolve(u0, config(eq, N, 1.0 / 3200, T)).fields.back(), ref);
    const double order = std::log2(e1 / e2);
    MESSAGE(to_string(eq) << " observed order " << order << " (errors " << e1 << ", " << e2 << ")");
    CHECK(order > 3.5);
    CHECK(order < 4.6);
  }
}

TEST_CASE("reflection runs the flow backwards") {
  for (Equation eq : kDeterministic) {
    const auto u0 = smooth(16, 1.5);
    const auto c = config(eq, 16, 1e-3, 0.5);
    const auto forward = evolve(u0, c).fields.back();
    const auto back = reflect(evolve(reflect(forward), c).fields.back());
    CHECK(max_diff(back, u0) < 1e-10);
  }
  const auto u = random_field(5, 2);
  CHECK(reflect(reflect(u)) == u);
  // u(-x): coefficients conjugate
  CHECK(reflect(u).coeff(2) == std::conj(u.coeff(2)));
}

TEST_CASE("rk4 option converges to the same flow") {
  const auto u0 = smooth(16, 1.0);
  auto c = config(Equation::kdv, 16, 1e-4, 0.2);
  const auto a = evolve(u0, c).fields.back();
  c.scheme = Scheme::rk4;
  const auto b = evolve(u0, c).fields.back();
  CHECK(max_diff(a, b) < 1e-9);
}

TEST_CASE("config validation") {
  auto c = config(Equation::kdv, 16, 1e-3, 1.0);
  CHECK_NOTHROW(c.validate());
  CHECK(c.steps() == 1000);
  c.T = 1.0005;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = config(Equation::kdv, 16, 0.5, 1.0);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.nonlinear = false;
  CHECK_NOTHROW(c.validate());
  c = config(Equation::kdv, 16, 1e-3, 1.0);
  c.noise_amplitude = -1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK(max_stable_dt(Equation::kdv, 16) > max_stable_dt(Equation::kdv, 32));
  CHECK(max_stable_dt(Equation::kdv, 16) >= 1e-3);
  CHECK(max_stable_dt(Equation::mkdv_defocusing, 16) >= 1e-3);
  CHECK(equation_from_string("mkdv_focusing") == Equation::mkdv_focusing);
  CHECK_THROWS_AS(equation_from_string("nls"), InvalidArgument);
  CHECK_THROWS_AS(evolve(FourierField(8), config(Equation::kdv, 16, 1e-3, 1.0)), InvalidArgument);
}

TEST_CASE("blow-up is reported with its time") {
  auto c = config(Equation::kdv, 16, 1e-3, 1.0);
  c.scheme = Scheme::rk4;
  c.dt = max_stable_dt(Equation::kdv, 16, Scheme::rk4) / 2.0;
  c.T = c.dt * 400;
  try {
    evolve(smooth(16, 1e4), c);
    FAIL("expected IntegrationAborted");
  } catch (const IntegrationAborted& e) {
    CHECK(e.time() > 0.0);
    CHECK(e.time() <= c.T);
  }
  auto g = config(Equation::mkdv_focusing, 16, 1e-3, 0.01);
  CHECK_THROWS_AS(evolve(smooth(16, 1e5), g), IntegrationAborted);
}

TEST_CASE("stochastic convolution") {
  auto c = config(Equation::skdv, 16, 1e-3, 0.5);
  c.noise_amplitude = 1.3;
  c.seed = 4;
  const auto first = stochastic_convolution(c, 0);
  for (int n = 1; n <= 16; ++n) CHECK(first.fields.front().coeff(n) == Complex(0, 0));
  CHECK(first.fields.size() == 501);
  CHECK(stochastic_convolution(c, 0).fields.back() == first.fields.back());
  CHECK_FALSE(stochastic_convolution(c, 1).fields.back() == first.fields.back());

  const std::size_t M = 4000;
  std::vector<std::vector<double>> e(17, std::vector<double>(M));
  std::vector<Complex> cross(M);
  for (std::size_t j = 0; j < M; ++j) {
    const auto end = stochastic_convolution(c, j).fields.back();
    for (int n = 1; n <= 16; ++n) e[n][j] = std::norm(end.coeff(n));
    cross[j] = end.coeff(1) * std::conj(end.coeff(2));
  }
  const double target = 1.3 * 1.3 * 0.5;
  const double z = stats::bonferroni_z(16);
  for (int n = 1; n <= 16; ++n) {
    const auto est = stats::batch_mean(e[n]);
    CHECK(std::abs(est.value - target) <= z * est.std_error);
  }
  const auto cc = stats::batch_mean(cross);
  CHECK(std::abs(cc.value) <= 3.0 * cc.std_error);
}

TEST_CASE("stochastic KdV") {
  SUBCASE("sigma = 0 reproduces the deterministic flow bit for bit") {
    auto c = config(Equation::skdv, 16, 1e-3, 0.3);
    c.seed = 9;
    const auto u0 = white(16, 2);
    const auto a = evolve_skdv(u0, c, 5);
    c.equation = Equation::kdv;
    const auto b = evolve(u0, c);
    REQUIRE(a.fields.size() == b.fields.size());
    for (std::size_t k = 0; k < a.fields.size(); ++k) REQUIRE(a.fields[k] == b.fields[k]);
  }
  SUBCASE("zero data without nonlinearity is the stochastic convolution") {
    auto c = config(Equation::skdv, 16, 1e-3, 0.2);
    c.noise_amplitude = 0.7;
    c.seed = 3;
    c.nonlinear = false;
    const auto a = evolve_skdv(FourierField(16), c, 11);
    const auto b = stochastic_convolution(c, 11);
    for (std::size_t k = 0; k < a.fields.size(); ++k) REQUIRE(a.fields[k] == b.fields[k]);
  }
  SUBCASE("energy grows linearly from zero data") {
    auto c = config(Equation::skdv, 16, 1e-3, 0.1);
    c.noise_amplitude = 1.0;
    c.seed = 6;
    const std::size_t M = 300;
    std::vector<double> energy(M);
    for (std::size_t j = 0; j < M; ++j) energy[j] = l2_squared(evolve_skdv(FourierField(16), c, j).fields.back());
    const auto est = stats::batch_mean(energy, 30);
    // E int u^2 = 2 N sigma^2 t: the nonlinearity conserves int u^2
    CHECK(std::abs(est.value - 2.0 * 16 * 0.1) <= 3.0 * est.std_error);
  }
}

TEST_CASE("trajectory JSONL round trip") {
  auto c = config(Equation::kdv, 6, 1e-3, 0.01);
  const auto tr = evolve(random_field(6, 8, 0.2), c);
  std::ostringstream os;
  write_trajectory_jsonl(os, c, tr);
  std::istringstream is(os.str());
  const auto back = read_trajectory_jsonl(is);
  CHECK(back.dt == tr.dt);
  REQUIRE(back.fields.size() == tr.fields.size());
  for (std::size_t k = 0; k < tr.fields.size(); ++k) CHECK(back.fields[k] == tr.fields[k]);
}

TEST_CASE("observer sees every step") {
  auto c = config(Equation::kdv, 8, 1e-3, 0.05);
  std::size_t calls = 0, last = 0;
  integrate(smooth(8, 1.0), c, [&](std::size_t k, double t, std::span<const Complex>) {
    CHECK(t == doctest::Approx(k * 1e-3));
    last = k;
    ++calls;
  });
  CHECK(calls == 51);
  CHECK(last == 50);
}
