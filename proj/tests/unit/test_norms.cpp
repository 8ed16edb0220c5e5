#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "helpers.hpp"
#include "wnlab/dynamics.hpp"
#include "wnlab/error.hpp"
#include "wnlab/norms.hpp"

using namespace wnlab;
using wnlab::testing::random_field;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FourierField comb(int N) { return FourierField(std::vector<Complex>(static_cast<std::size_t>(N), 1.0)); }

double bracket(double x) { return 1.0 + std::abs(x); }

// direct O(K^2) evaluation of the windowed space-time transform
std::vector<double> brute_row(const Trajectory& tr, int n, double b) {
  const int K = static_cast<int>(tr.fields.size()) - 1;
  const double T = tr.dt * K, dtau = 2.0 * M_PI / T, omega = double(n) * n * n;
  const long long first = std::llround(omega / dtau) - K / 2;
  std::vector<double> row;
  for (long long k = first; k < first + K; ++k) {
    const double tau = dtau * double(k);
    Complex acc = 0.0;
    for (int j = 0; j < K; ++j) acc += tr.fields[j].coeff(n) * std::polar(1.0, -tau * tr.dt * j);
    row.push_back(tr.dt * std::abs(acc) * std::pow(bracket(tau - omega), b));
  }
  return row;
}

double brute_xsb(const Trajectory& tr, double s, double b) {
  const int N = tr.fields.front().cutoff();
  const double T = tr.duration();
  double acc = 0.0;
  for (int n = -N; n <= N; ++n) {
    if (n == 0) continue;
    for (double v : brute_row(tr, n, b)) acc += std::pow(bracket(n), 2 * s) * v * v / T;
  }
  return std::sqrt(acc);
}

double brute_xsbpq(const Trajectory& tr, double s, double b, double p, double q) {
  const int N = tr.fields.front().cutoff();
  const double T = tr.duration();
  auto tnorm = [&](int n) {
    double acc = 0.0;
    for (double v : brute_row(tr, n, b)) acc += std::pow(v, q) / T;
    return std::pow(acc, 1.0 / q);
  };
  double best = 0.0;
  for (int lo = 1; lo <= N; lo *= 2) {
    double acc = 0.0;
    for (int n = lo; n < 2 * lo && n <= N; ++n)
      acc += std::pow(std::pow(bracket(n), s) * tnorm(n), p) + std::pow(std::pow(bracket(n), s) * tnorm(-n), p);
    best = std::max(best, std::pow(acc, 1.0 / p));
  }
  return best;
}

Trajectory random_trajectory(int N, int K, double dt, std::uint64_t seed) {
  Trajectory tr{dt, {}};
  for (int j = 0; j <= K; ++j) tr.fields.push_back(random_field(N, seed * 1000 + static_cast<std::uint64_t>(j)));
  return tr;
}

}  // namespace

TEST_CASE("spatial norms on hand examples") {
  const auto u = single_mode(4, 1, 1.0);
  CHECK(spatial_norm(u, {NormFamily::besov_hat, 0.0, 0.0, 2.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(spatial_norm(u, {NormFamily::sobolev, 0.0}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(spatial_norm(u, {NormFamily::fourier_lebesgue, 0.0, 0.0, kInf}) == doctest::Approx(1.0));
  CHECK(spatial_norm(FourierField(5), {NormFamily::sobolev, -1.0}) == 0.0);

  const auto r = random_field(20, 7);
  CHECK(spatial_norm(r, {NormFamily::sobolev, 0.0}) == doctest::Approx(std::sqrt(l2_squared(r))));
  CHECK(spatial_norm(r, {NormFamily::fourier_lebesgue, 0.0, 0.0, 2.0}) ==
        doctest::Approx(std::sqrt(l2_squared(r))));

  // block {2, 3}: (2 (3^s |v|)^p + 2 (4^s |v|)^p)^{1/p}
  const auto v = FourierField({0.0, 0.5, 0.5});
  const double s = -0.4, p = 3.0;
  const double expect = std::pow(2 * std::pow(std::pow(3, s) * 0.5, p) + 2 * std::pow(std::pow(4, s) * 0.5, p), 1 / p);
  CHECK(spatial_norm(v, {NormFamily::besov_hat, s, 0.0, p}) == doctest::Approx(expect));
  CHECK_THROWS_AS(spatial_norm(v, {NormFamily::xsb, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(spatial_norm(v, {NormFamily::sobolev, 0.0, 0.0, 0.5}), InvalidArgument);
}

TEST_CASE("Dirac comb: hat-Besov bounded when sp <= -1, H^{-1/2} diverges") {
  const double cap = std::sqrt(2.0 * std::log(2.0));
  double prev = 0.0;
  for (int N = 4; N <= 16384; N *= 4) {
    const double b = spatial_norm(comb(N), {NormFamily::besov_hat, -0.5, 0.0, 2.0});
    CHECK(b <= cap);
    double acc = 0.0;
    for (int n = 1; n <= N; ++n) acc += 1.0 / (1.0 + n);
    const double h = spatial_norm(comb(N), {NormFamily::sobolev, -0.5});
    CHECK(h == doctest::Approx(std::sqrt(2.0 * acc)).epsilon(1e-12));
    CHECK(h > prev);
    prev = h;
  }
  CHECK(prev > std::sqrt(2.0 * std::log(16384.0)) - 1.0);
}

TEST_CASE("space-time norms") {
  SUBCASE("zero trajectory") {
    Trajectory z{0.1, std::vector<FourierField>(9, FourierField(3))};
    CHECK(xsb_norm(z, {NormFamily::xsb, 0.5, 0.5}) == 0.0);
  }
  SUBCASE("free single mode lands on one frequency") {
    const int K = 64;
    const double T = 2.0 * M_PI, dt = T / K;
    const Complex v(0.3, -0.4);
    EvolutionConfig c;
    c.cutoff = 3;
    c.dt = dt;
    c.T = T;
    c.nonlinear = false;
    const auto tr = evolve(single_mode(3, 1, v), c);
    REQUIRE(tr.fields.size() == K + 1);
    for (double s : {0.0, 0.5, -0.3})
      for (double b : {0.0, 0.5, 0.9})
        CHECK(xsb_norm(tr, {NormFamily::xsb, s, b}) ==
              doctest::Approx(std::sqrt(2.0 * T) * std::pow(2.0, s) * std::abs(v)).epsilon(1e-10));
  }
  SUBCASE("off-grid free mode matches the direct transform") {
    EvolutionConfig c;
    c.cutoff = 4;
    c.dt = 0.05;
    c.T = 1.6;
    c.nonlinear = false;
    const auto tr = evolve(random_field(4, 3), c);
    for (double b : {0.0, 0.5})
      CHECK(xsb_norm(tr, {NormFamily::xsb, 0.3, b}) == doctest::Approx(brute_xsb(tr, 0.3, b)).epsilon(1e-10));
  }
  SUBCASE("random trajectories against brute force") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto tr = random_trajectory(5, 12, 0.07, seed);
      CHECK(xsb_norm(tr, {NormFamily::xsb, -0.2, 0.6}) == doctest::Approx(brute_xsb(tr, -0.2, 0.6)).epsilon(1e-10));
      CHECK(xsb_norm(tr, {NormFamily::xsbpq, -0.2, 0.6, 3.0, 4.0}) ==
            doctest::Approx(brute_xsbpq(tr, -0.2, 0.6, 3.0, 4.0)).epsilon(1e-10));
    }
  }
  SUBCASE("b = 0 is the time-averaged H^s norm") {
    const auto tr = random_trajectory(6, 20, 0.03, 9);
    double acc = 0.0;
    for (int j = 0; j < 20; ++j) acc += tr.dt * std::pow(spatial_norm(tr.fields[j], {NormFamily::sobolev, 0.7}), 2);
    CHECK(xsb_norm(tr, {NormFamily::xsb, 0.7, 0.0}) == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
  }
  SUBCASE("X^{s,b}_{p,2} is dominated by X^{s,b} for p >= 2") {
    for (std::uint64_t seed = 10; seed < 30; ++seed) {
      const auto tr = random_trajectory(9, 16, 0.05, seed);
      const double full = xsb_norm(tr, {NormFamily::xsb, -0.3, 0.5});
      for (double p : {2.0, 3.0, kInf})
        CHECK(xsb_norm(tr, {NormFamily::xsbpq, -0.3, 0.5, p, 2.0}) <= full * (1 + 1e-12));
    }
  }
  SUBCASE("preconditions") {
    Trajectory one{0.1, {FourierField(2)}};
    CHECK_THROWS_AS(xsb_norm(one, {NormFamily::xsb, 0.0}), InvalidArgument);
    Trajectory mixed{0.1, {FourierField(2), FourierField(3)}};
    CHECK_THROWS_AS(xsb_norm(mixed, {NormFamily::xsb, 0.0}), InvalidArgument);
  }
}

TEST_CASE("resonance identities") {
  CHECK(resonance3(1, 1) == 6);
  CHECK(resonance3(1, -1) == 0);
  CHECK(resonance3(2, 3) == 90);
  for (std::int64_t a = -300; a <= 300; ++a)
    for (std::int64_t b = -300; b <= 300; ++b) {
      const std::int64_t n = a + b;
      REQUIRE(resonance3(a, b) == n * n * n - a * a * a - b * b * b);
    }
  for (std::int64_t a = -40; a <= 40; ++a)
    for (std::int64_t b = -40; b <= 40; ++b)
      for (std::int64_t c = -40; c <= 40; ++c) {
        const std::int64_t n = a + b + c;
        REQUIRE(resonance4(a, b, c) == n * n * n - a * a * a - b * b * b - c * c * c);
      }
}

TEST_CASE("norms csv") {
  std::ostringstream os;
  const std::vector<NormRecord> rows = {{0, {NormFamily::besov_hat, -0.4, 0.0, 3.0}, 1.25},
                                        {1, {NormFamily::fourier_lebesgue, 0.0, 0.0, kInf}, 2.0}};
  write_norms_csv(os, rows);
  CHECK(os.str() == "sample_id,family,s,b,p,q,value\n0,besov_hat,-0.40000000000000002,0,3,2,1.25\n"
                    "1,fourier_lebesgue,0,0,inf,2,2\n");
  CHECK(norm_family_from_string("xsbpq") == NormFamily::xsbpq);
  CHECK_THROWS_AS(norm_family_from_string("l7"), InvalidArgument);
}
