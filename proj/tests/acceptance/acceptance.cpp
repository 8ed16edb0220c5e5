// Acceptance runner: `acceptance <id>` runs one criterion, `acceptance all` runs every one.
// Prints indented sub-checks and one final "<id> PASS|FAIL" line. Exit 0 iff PASS.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "wnlab/cli.hpp"
#include "wnlab/experiments.hpp"
#include "wnlab/field.hpp"
#include "wnlab/measures.hpp"
#include "wnlab/norms.hpp"
#include "wnlab/rng.hpp"

using namespace wnlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Checks {
  bool ok = true;

  void add(const std::string& name, bool pass, double value, double threshold, const std::string& rule) {
    ok = ok && pass;
    std::printf("  %s %s  value=%.6g  threshold=%.6g  [%s]\n", pass ? "pass" : "FAIL", name.c_str(), value,
                threshold, rule.c_str());
  }
  void le(const std::string& name, double value, double threshold) {
    add(name, value <= threshold, value, threshold, "value <= threshold");
  }
  void report(const ExperimentReport& r, const std::string& prefix = "") {
    for (const auto& v : r.verdicts) add(prefix + v.name, v.pass, v.value, v.threshold, v.rule);
    for (const auto& s : r.subreports) report(s, prefix + s.name + "/");
  }
};

nlohmann::json comparable(nlohmann::json j) {
  j.erase("wall_seconds");
  if (j.contains("config")) j["config"].erase("workers");
  if (j.contains("subreports"))
    for (auto& s : j["subreports"]) s = comparable(s);
  return j;
}

std::string tables_csv(const ExperimentReport& r) {
  std::ostringstream os;
  for (const auto& t : r.tables) t.write_csv(os);
  for (const auto& s : r.subreports) os << tables_csv(s);
  return os.str();
}

// white-noise characteristic functional at a single-mode f with ||f||^2 = 1/2
void criterion_1(Checks& c) {
  const auto t0 = Clock::now();
  const std::size_t M = 50000;
  MeasureSpec spec;
  spec.kind = MeasureKind::white;
  spec.cutoff = 64;
  spec.seed = 1;
  const auto samples = sample_batch(spec, M);
  const TestFunction f(single_mode(64, 1, 0.5));
  const auto est = char_functional(samples, f);
  const double err = std::abs(est - std::exp(-0.25));
  c.le("char_functional_error", err, 3.0 / std::sqrt(static_cast<double>(M)));
  c.le("runtime_seconds", seconds_since(t0), 60.0);
}

void criterion_2(Checks& c, Equation eq) {
  const auto t0 = Clock::now();
  InvarianceConfig cfg;
  cfg.equation = eq;
  cfg.cutoff = 16;
  cfg.T = 1.0;
  cfg.dt = 1e-3;
  cfg.samples = 20000;
  c.report(invariance_test(cfg));
  c.le("runtime_seconds", seconds_since(t0), 600.0);
}

void criterion_3(Checks& c) {
  MomentsConfig cfg;
  cfg.betas = {1e-2, 1e-3};
  cfg.samples = 100000;
  cfg.relative_tolerance = 0.05;
  cfg.reference_constant = std::numbers::pi / 2.0;
  cfg.reference_tolerance = 0.10;
  c.report(moment_scaling_test(cfg));
}

void criterion_4(Checks& c) {
  const double beta = 1e-6;
  const int N = static_cast<int>(std::lround(10.0 / std::sqrt(beta)));
  const double v = std::sqrt(beta) * a_beta(beta, N);
  c.le("sqrt_beta_a_beta_rel_err_vs_pi", std::abs(v - std::numbers::pi) / std::numbers::pi, 0.02);
  std::printf("  info sqrt(beta) a_beta = %.6f at N = %d\n", v, N);
}

void criterion_5(Checks& c) {
  const auto t0 = Clock::now();
  for (int p : {3, 4}) {
    ConvergenceConfig cfg;
    cfg.p = p;
    cfg.betas = {1e-1, 1e-2, 1e-3, 1e-4};
    cfg.K = 10.0;
    cfg.samples = 100000;
    c.report(weak_convergence_test(cfg), "p" + std::to_string(p) + "/");
  }
  c.le("runtime_seconds", seconds_since(t0), 900.0);
}

void criterion_6(Checks& c) {
  TailConfig cfg;
  cfg.samples = 100000;
  cfg.confidence = 0.99;
  c.report(tail_test(cfg));
}

void criterion_7(Checks& c) {
  HyperConfig cfg;
  cfg.betas = {1e-1, 1e-2, 1e-3};
  cfg.cutoff = 32;
  cfg.q = {2, 4, 6, 8};
  c.report(hypercontractivity_test(cfg));
}

void criterion_8(Checks& c) {
  SkdvConfig cfg;
  cfg.cutoff = 16;
  cfg.samples = 10000;
  c.report(skdv_test(cfg));
}

void criterion_9(Checks& c) {
  FerniqueConfig cfg;
  cfg.cutoff = 256;
  cfg.samples = 100000;
  c.report(fernique_test(cfg));
}

void resonance_checks(Checks& c) {
  const std::int64_t L = 1000;
  std::int64_t bad3 = 0;
  for (std::int64_t a = -L; a <= L; ++a)
    for (std::int64_t b = -L; b <= L; ++b) {
      const std::int64_t n = a + b;
      if (n * n * n - a * a * a - b * b * b != resonance3(a, b)) ++bad3;
    }
  c.le("resonance3_mismatches", static_cast<double>(bad3), 0.0);

  const auto t0 = Clock::now();
  std::int64_t bad4 = 0;
  for (std::int64_t a = -L; a <= L; ++a) {
    const std::int64_t a3 = a * a * a;
    for (std::int64_t b = -L; b <= L; ++b) {
      const std::int64_t ab3 = a3 + b * b * b;
      for (std::int64_t d = -L; d <= L; ++d) {
        const std::int64_t n = a + b + d;
        bad4 += (n * n * n - ab3 - d * d * d != resonance4(a, b, d));
      }
    }
  }
  c.le("resonance4_mismatches", static_cast<double>(bad4), 0.0);
  std::printf("  info resonance4 sweep over %lld triples took %.1f s\n",
              static_cast<long long>((2 * L + 1) * (2 * L + 1) * (2 * L + 1)), seconds_since(t0));
}

void criterion_10(Checks& c) {
  double linear_drift = 0.0;
  bool linear_ok = true;
  for (Equation eq : {Equation::kdv, Equation::mkdv_focusing, Equation::mkdv_defocusing})
    for (int N : {5, 8, 16}) {
      InvarianceConfig cfg;
      cfg.equation = eq;
      cfg.cutoff = N;
      cfg.T = 1.0;
      cfg.nonlinear = false;
      cfg.samples = 5000;
      const auto r = invariance_test(cfg);
      linear_ok = linear_ok && r.passed();
      linear_drift = std::max(linear_drift, r.find("l2_drift")->value);
    }
  c.add("linear_flow_invariance", linear_ok, linear_ok ? 1.0 : 0.0, 1.0, "all cells pass");
  c.le("linear_flow_l2_drift", linear_drift, 1e-12);

  resonance_checks(c);

  const std::vector<std::string> args = {"sample", "--measure", "mu_beta", "--beta", "0.01", "--modes", "32",
                                         "--count", "20", "--seed", "11"};
  std::ostringstream a, b, err;
  const int ca = cli::run(args, a, err), cb = cli::run(args, b, err);
  c.add("sample_bytes_identical", ca == 0 && cb == 0 && a.str() == b.str() && !a.str().empty(),
        static_cast<double>(a.str().size()), static_cast<double>(b.str().size()), "equal output bytes");

  InvarianceConfig inv;
  inv.cutoff = 8;
  inv.T = 0.05;
  inv.samples = 400;
  inv.workers = 1;
  const auto r1 = invariance_test(inv);
  inv.workers = 3;
  const auto r3 = invariance_test(inv);
  const auto j1 = comparable(r1.to_json()).dump(), j3 = comparable(r3.to_json()).dump();
  c.add("report_bytes_identical", j1 == j3 && tables_csv(r1) == tables_csv(r3), static_cast<double>(j1.size()),
        static_cast<double>(j3.size()), "equal JSON and CSV bytes across worker counts");

  double worst = 0.0;
  for (int N : {1, 3, 8, 16, 33, 64, 128})
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed, static_cast<std::uint64_t>(N));
      std::vector<Complex> coeffs(static_cast<std::size_t>(N));
      for (auto& z : coeffs) z = rng.complex_normal();
      const FourierField u(std::move(coeffs));
      for (int p : {2, 3, 4}) {
        const double g = integral_power(u, p, FunctionalRoute::padded_grid);
        const double v = integral_power(u, p, FunctionalRoute::convolution);
        worst = std::max(worst, std::abs(g - v) / std::max(1.0, std::abs(g)));
      }
    }
  c.le("dealiased_vs_convolution", worst, 1e-10);
}

const std::map<std::string, std::function<void(Checks&)>>& criteria() {
  static const std::map<std::string, std::function<void(Checks&)>> m = {
      {"1", criterion_1},
      {"2a", [](Checks& c) { criterion_2(c, Equation::kdv); }},
      {"2b", [](Checks& c) { criterion_2(c, Equation::mkdv_defocusing); }},
      {"3", criterion_3},
      {"4", criterion_4},
      {"5", criterion_5},
      {"6", criterion_6},
      {"7", criterion_7},
      {"8", criterion_8},
      {"9", criterion_9},
      {"10", criterion_10},
  };
  return m;
}

bool run_one(const std::string& id) {
  Checks c;
  const auto t0 = Clock::now();
  try {
    criteria().at(id)(c);
  } catch (const std::exception& e) {
    std::printf("  FAIL exception: %s\n", e.what());
    c.ok = false;
  }
  std::printf("%s %s (%.1f s)\n", id.c_str(), c.ok ? "PASS" : "FAIL", seconds_since(t0));
  std::fflush(stdout);
  return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2 || (std::string(argv[1]) != "all" && !criteria().count(argv[1]))) {
    std::cerr << "usage: acceptance <1|2a|2b|3|4|5|6|7|8|9|10|all>\n";
    return 1;
  }
  const std::string id = argv[1];
  if (id != "all") return run_one(id) ? 0 : 1;
  bool ok = true;
  for (const auto& [k, fn] : criteria()) ok = run_one(k) && ok;
  return ok ? 0 : 1;
}
