#include "wnlab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "wnlab/config.hpp"
#include "wnlab/dynamics.hpp"
#include "wnlab/error.hpp"
#include "wnlab/experiments.hpp"
#include "wnlab/measures.hpp"
#include "wnlab/norms.hpp"

namespace wnlab::cli {

namespace {

namespace fs = std::filesystem;

const char* const kUsage =
    "usage: wnlab <subcommand> [--config PATH] [--out DIR] [--seed U64] [--workers K]\n"
    "subcommands: sample evolve norms invariance converge tails decay moments hyper growth skdv\n"
    "  sample also accepts --measure KIND --modes N --count M [--beta B --p P --K K]\n"
    "environment: WNLAB_WORKERS sets the default worker count\n";

struct Options {
  std::string subcommand;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  // sample only
  std::string measure = "white";
  int modes = 0;
  std::size_t count = 1;
  double beta = 0.0;
  int p = 4;
  double K = 10.0;
};

nlohmann::json load_config(const Options& o) {
  if (o.config.empty()) return nlohmann::json::object();
  std::ifstream is(o.config);
  if (!is) throw Error("cannot open config '" + o.config + "'");
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
}

// --seed replaces every "seed" in the config; --workers sets the top-level pool size
void apply_overrides(nlohmann::json& j, const Options& o) {
  if (o.seed) {
    std::function<void(nlohmann::json&)> walk = [&](nlohmann::json& node) {
      if (node.is_object()) {
        for (auto& [key, value] : node.items()) {
          if (key == "seed") value = *o.seed;
          else walk(value);
        }
      } else if (node.is_array()) {
        for (auto& v : node) walk(v);
      }
    };
    j["seed"] = *o.seed;
    walk(j);
  }
  if (o.workers) j["workers"] = *o.workers;
}

fs::path out_dir(const Options& o) { return o.out.empty() ? fs::path("wnlab_out") : fs::path(o.out); }

int finish_report(const ExperimentReport& r, const Options& o, std::ostream& out) {
  const auto dir = out_dir(o);
  r.write(dir);
  out << r.name << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << std::fixed << std::setprecision(1)
      << r.wall_seconds << " s)\n";
  std::function<void(const ExperimentReport&)> show = [&](const ExperimentReport& rep) {
    for (const auto& v : rep.verdicts)
      out << "  " << (v.pass ? "pass " : "FAIL ") << v.name << "  value=" << std::setprecision(6)
          << std::defaultfloat << v.value << "  threshold=" << v.threshold << "  [" << v.rule << "]\n";
    for (const auto& s : rep.subreports) show(s);
  };
  show(r);
  out << "report: " << (dir / (r.name + ".json")).string() << '\n';
  return r.passed() ? kExitPass : kExitFail;
}

// ------------------------------------------------------------------ sample

int cmd_sample(const Options& o, std::ostream& out) {
  MeasureSpec spec;
  std::size_t count = o.count;
  if (!o.config.empty()) {
    auto j = load_config(o);
    apply_overrides(j, o);
    j.erase("workers");
    ConfigReader r(j);
    count = r.get("count", count);
    nlohmann::json m = j;
    m.erase("count");
    spec = measure_spec_from_json(m);
  } else {
    if (o.modes < 1) throw InvalidArgument("sample: --modes must be >= 1");
    spec.kind = measure_kind_from_string(o.measure);
    spec.cutoff = o.modes;
    spec.beta = o.beta;
    spec.p = o.p;
    spec.K = o.K;
    spec.seed = o.seed.value_or(0);
    spec.validate();
  }
  const auto samples = sample_batch(spec, count);
  if (o.out.empty()) {
    write_samples_jsonl(out, spec, samples);
  } else {
    fs::create_directories(o.out);
    std::ofstream os(fs::path(o.out) / "samples.jsonl");
    if (!os) throw Error("cannot write to " + o.out);
    write_samples_jsonl(os, spec, samples);
  }
  return kExitPass;
}

// ------------------------------------------------------------------ evolve

int cmd_evolve(const Options& o, std::ostream& out) {
  auto j = load_config(o);
  apply_overrides(j, o);
  ConfigReader r(j);
  EvolutionConfig c;
  try {
    c.equation = equation_from_string(r.get<std::string>("equation", "kdv"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("equation", e.what());
  }
  c.cutoff = r.get("cutoff", c.cutoff);
  c.dt = r.get("dt", c.dt);
  c.T = r.get("T", c.T);
  c.noise_amplitude = r.get("noise_amplitude", c.noise_amplitude);
  c.seed = r.get("seed", c.seed);
  c.nonlinear = r.get("nonlinear", c.nonlinear);
  try {
    c.scheme = scheme_from_string(r.get<std::string>("scheme", "gauss4"));
  } catch (const InvalidArgument& e) {
    throw ConfigError("scheme", e.what());
  }
  std::vector<int> observe = r.get("observe_modes", std::vector<int>{1});
  const bool write_traj = r.get("write_trajectory", true);
  r.get("workers", std::size_t{0});
  FourierField u0(std::max(c.cutoff, 1));
  nlohmann::json initial = {{"measure", {{"kind", "white"}, {"cutoff", c.cutoff}, {"seed", c.seed}}}};
  if (r.has("initial")) initial = r.child("initial");
  r.finish();
  try {
    c.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("<root>", e.what());
  }
  {
    ConfigReader ir(initial, "initial");
    if (ir.has("field")) {
      try {
        u0 = field_from_json(ir.child("field"));
      } catch (const std::exception& e) {
        throw ConfigError("initial.field", e.what());
      }
    } else {
      const auto spec = measure_spec_from_json(ir.child("measure"), "initial.measure");
      Rng rng(spec.seed, 0);
      u0 = sample(spec, rng).field;
    }
    ir.finish();
  }
  if (u0.cutoff() != c.cutoff) throw ConfigError("initial", "cutoff differs from the config cutoff");
  for (int n : observe)
    if (n < 1 || n > c.cutoff) throw ConfigError("observe_modes", "mode outside 1..cutoff");

  const Equation eq = c.equation == Equation::skdv ? Equation::kdv : c.equation;
  std::ostringstream csv;
  csv << "t,l2,hamiltonian";
  for (int n : observe) csv << ",abs_u" << n;
  csv << '\n' << std::setprecision(17);
  Trajectory traj{c.dt, {}};
  auto observer = [&](std::size_t, double t, std::span<const Complex> u) {
    FourierField f(std::vector<Complex>(u.begin(), u.end()));
    csv << t << ',' << l2_squared(f) << ',' << hamiltonian(f, eq);
    for (int n : observe) csv << ',' << std::abs(f.coeff(n));
    csv << '\n';
    if (write_traj) traj.fields.push_back(std::move(f));
  };
  if (c.equation == Equation::skdv) integrate_skdv(u0, c, observer);
  else integrate(u0, c, observer);

  if (o.out.empty()) {
    out << csv.str();
    return kExitPass;
  }
  fs::create_directories(o.out);
  std::ofstream(fs::path(o.out) / "observables.csv") << csv.str();
  if (write_traj) {
    std::ofstream os(fs::path(o.out) / "trajectory.jsonl");
    write_trajectory_jsonl(os, c, traj);
  }
  out << "evolve: " << c.steps() << " steps written to " << o.out << '\n';
  return kExitPass;
}

// ------------------------------------------------------------------- norms

NormSpec norm_spec_from_json(const nlohmann::json& j, const std::string& prefix) {
  ConfigReader r(j, prefix);
  NormSpec s;
  try {
    s.family = norm_family_from_string(r.require<std::string>("family"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.path("family"), e.what());
  }
  auto number = [&](const std::string& key, double fallback) {
    if (!r.has(key)) return fallback;
    const auto& v = r.child(key);
    if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
    if (!v.is_number()) throw ConfigError(r.path(key), "wrong type");
    return v.get<double>();
  };
  s.s = number("s", 0.0);
  s.b = number("b", 0.0);
  s.p = number("p", 2.0);
  s.q = number("q", 2.0);
  r.finish();
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(prefix, e.what());
  }
  return s;
}

int cmd_norms(const Options& o, std::ostream& out) {
  auto j = load_config(o);
  apply_overrides(j, o);
  ConfigReader r(j);
  std::vector<NormSpec> specs;
  const auto& list = r.child("norms");
  if (!list.is_array() || list.empty()) throw ConfigError("norms", "expected a non-empty array");
  for (std::size_t k = 0; k < list.size(); ++k)
    specs.push_back(norm_spec_from_json(list[k], "norms[" + std::to_string(k) + "]"));
  r.get("workers", std::size_t{0});
  r.get("seed", std::uint64_t{0});

  std::vector<FourierField> fields;
  std::optional<Trajectory> traj;
  const int sources = r.has("measure") + r.has("samples_file") + r.has("trajectory_file");
  if (sources != 1) throw ConfigError("<root>", "give exactly one of measure, samples_file, trajectory_file");
  if (r.has("measure")) {
    const auto spec = measure_spec_from_json(r.child("measure"), "measure");
    const auto count = r.get("count", std::size_t{1});
    for (auto& s : sample_batch(spec, count)) fields.push_back(std::move(s.field));
  } else if (r.has("samples_file")) {
    const auto path = r.require<std::string>("samples_file");
    std::ifstream is(path);
    if (!is) throw ConfigError("samples_file", "cannot open '" + path + "'");
    for (auto& s : read_samples_jsonl(is)) fields.push_back(std::move(s.field));
  } else {
    const auto path = r.require<std::string>("trajectory_file");
    std::ifstream is(path);
    if (!is) throw ConfigError("trajectory_file", "cannot open '" + path + "'");
    traj = read_trajectory_jsonl(is);
    fields = traj->fields;
  }
  r.finish();

  std::vector<NormRecord> rows;
  for (const auto& spec : specs) {
    if (spec.family == NormFamily::xsb || spec.family == NormFamily::xsbpq) {
      if (!traj) throw ConfigError("norms", "space-time norms need trajectory_file");
      rows.push_back({0, spec, xsb_norm(*traj, spec)});
    } else {
      for (std::size_t k = 0; k < fields.size(); ++k) rows.push_back({k, spec, spatial_norm(fields[k], spec)});
    }
  }
  if (o.out.empty()) {
    write_norms_csv(out, rows);
  } else {
    fs::create_directories(o.out);
    std::ofstream os(fs::path(o.out) / "norms.csv");
    write_norms_csv(os, rows);
    out << "norms: " << rows.size() << " rows written to " << o.out << '\n';
  }
  return kExitPass;
}

// ------------------------------------------------------------- experiments

template <class Parse, class Run>
int experiment(const Options& o, std::ostream& out, Parse parse, Run run_it) {
  auto j = load_config(o);
  apply_overrides(j, o);
  const auto config = parse(j);
  return finish_report(run_it(config), o, out);
}

int dispatch(const Options& o, std::ostream& out) {
  const auto& s = o.subcommand;
  if (s == "sample") return cmd_sample(o, out);
  if (s == "evolve") return cmd_evolve(o, out);
  if (s == "norms") return cmd_norms(o, out);
  if (s == "invariance") return experiment(o, out, invariance_config_from_json, invariance_test);
  if (s == "converge") return experiment(o, out, convergence_config_from_json, weak_convergence_test);
  if (s == "tails") return experiment(o, out, tail_config_from_json, tail_test);
  if (s == "decay") return experiment(o, out, decay_config_from_json, decay_ratio_test);
  if (s == "moments") return experiment(o, out, moments_config_from_json, moment_scaling_test);
  if (s == "hyper") return experiment(o, out, hyper_config_from_json, hypercontractivity_test);
  if (s == "growth") return experiment(o, out, growth_config_from_json, growth_bound_test);
  if (s == "skdv") return experiment(o, out, skdv_config_from_json, skdv_test);
  throw InvalidArgument("unknown subcommand '" + s + "'");
}

bool known(const std::string& s) {
  for (const char* k : {"sample", "evolve", "norms", "invariance", "converge", "tails", "decay", "moments",
                        "hyper", "growth", "skdv"})
    if (s == k) return true;
  return false;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty() || !known(args.front())) {
    if (!args.empty() && args.front() != "--help" && args.front() != "-h")
      err << "error: unknown subcommand '" << args.front() << "'\n";
    err << kUsage;
    return args.empty() || (args.front() != "--help" && args.front() != "-h") ? kExitError : kExitPass;
  }
  Options o;
  o.subcommand = args.front();
  CLI::App app{"wnlab " + o.subcommand};
  app.add_option("--config", o.config, "JSON config file");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "override every seed in the config");
  app.add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  if (o.subcommand == "sample") {
    app.add_option("--measure", o.measure, "white | mu_beta | mu_tilde_beta | rho_beta");
    app.add_option("--modes", o.modes, "cutoff N");
    app.add_option("--count", o.count, "number of samples");
    app.add_option("--beta", o.beta);
    app.add_option("--p", o.p);
    app.add_option("--K", o.K);
  }
  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);  // CLI11 wants reversed order
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help() << kUsage;
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << kUsage;
    return kExitError;
  }
  try {
    return dispatch(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace wnlab::cli
