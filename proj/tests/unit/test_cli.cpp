#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wnlab/cli.hpp"
#include "wnlab/experiments.hpp"
#include "wnlab/measures.hpp"

namespace fs = std::filesystem;
using namespace wnlab;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("wnlab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_json(const fs::path& dir, const std::string& name, const nlohmann::json& j) {
  const auto p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream is(p);
  return nlohmann::json::parse(is);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("sample output is byte-identical across runs") {
  const std::vector<std::string> args = {"sample", "--measure", "white", "--modes", "8", "--count", "3", "--seed", "7"};
  const auto a = run(args);
  const auto b = run(args);
  CHECK(a.code == cli::kExitPass);
  CHECK(a.out == b.out);
  std::istringstream is(a.out);
  MeasureSpec spec;
  const auto samples = read_samples_jsonl(is, &spec);
  CHECK(samples.size() == 3);
  CHECK(spec.seed == 7);
  CHECK(spec.cutoff == 8);

  const auto c = run({"sample", "--measure", "white", "--modes", "8", "--count", "3", "--seed", "8"});
  CHECK(c.out != a.out);
}

TEST_CASE("the standalone binary is deterministic too") {
  const char* exe = std::getenv("WNLAB_CLI");
  if (exe == nullptr) return;
  const auto dir = scratch("binary");
  const std::string base = std::string(exe) + " sample --measure mu_beta --beta 0.01 --modes 16 --count 5 --seed 3 > ";
  REQUIRE(std::system((base + (dir / "a.jsonl").string()).c_str()) == 0);
  REQUIRE(std::system((base + (dir / "b.jsonl").string()).c_str()) == 0);
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK(std::system((std::string(exe) + " frobnicate > /dev/null 2>&1").c_str()) != 0);
}

TEST_CASE("unknown subcommand prints usage and exits 1") {
  const auto r = run({"frobnicate"});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("usage") != std::string::npos);
  CHECK(run({}).code == cli::kExitError);
}

TEST_CASE("malformed configs exit 1 naming the key") {
  const auto dir = scratch("bad");
  auto p = write_json(dir, "c.json", {{"equation", "kdv"}, {"sampels", 10}});
  auto r = run({"invariance", "--config", p.string(), "--out", (dir / "out").string()});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("sampels") != std::string::npos);

  p = write_json(dir, "d.json", {{"blocks", {16, 32}}, {"delta", "half"}});
  r = run({"decay", "--config", p.string()});
  CHECK(r.code == cli::kExitError);
  CHECK(r.err.find("delta") != std::string::npos);

  std::ofstream(dir / "broken.json") << "{not json";
  CHECK(run({"tails", "--config", (dir / "broken.json").string()}).code == cli::kExitError);
  CHECK(run({"tails", "--config", (dir / "missing.json").string()}).code == cli::kExitError);
  CHECK(run({"tails", "--bogus-flag"}).code == cli::kExitError);
}

TEST_CASE("experiment subcommands write reports and map verdicts to exit codes") {
  const auto dir = scratch("exp");
  const auto cfg = write_json(dir, "inv.json",
                              {{"equation", "kdv"}, {"cutoff", 8}, {"T", 0.02}, {"samples", 300}, {"seed", 4}});
  const auto out = dir / "out";
  auto r = run({"invariance", "--config", cfg.string(), "--out", out.string(), "--workers", "2"});
  CHECK(r.code == cli::kExitPass);
  REQUIRE(fs::exists(out / "invariance.json"));
  CHECK(fs::exists(out / "invariance_char_functional.csv"));
  CHECK(fs::exists(out / "invariance_modes.csv"));
  const auto rep = read_json(out / "invariance.json");
  CHECK(rep.at("config").at("samples") == 300);
  CHECK(rep.at("config").at("workers") == 2);
  CHECK(rep.at("passed") == true);

  // --seed replaces every seed in the config
  r = run({"invariance", "--config", cfg.string(), "--out", out.string(), "--seed", "99"});
  CHECK(read_json(out / "invariance.json").at("config").at("seed") == 99);

  // an unattainable tolerance fails the verdict: exit 2
  const auto strict = write_json(dir, "mom.json",
                                 {{"betas", {0.1, 0.01}}, {"samples", 2000}, {"relative_tolerance", 1e-9}});
  r = run({"moments", "--config", strict.string(), "--out", out.string()});
  CHECK(r.code == cli::kExitFail);
  CHECK(r.out.find("FAIL wick2_second_moment") != std::string::npos);
}

TEST_CASE("reports are reproducible from the same config") {
  const auto dir = scratch("repro");
  const auto cfg = write_json(dir, "h.json", {{"cutoff", 8}, {"samples", 2000}, {"seed", 3}});
  CHECK(run({"hyper", "--config", cfg.string(), "--out", (dir / "a").string(), "--workers", "1"}).code ==
        cli::kExitPass);
  CHECK(run({"hyper", "--config", cfg.string(), "--out", (dir / "b").string(), "--workers", "3"}).code ==
        cli::kExitPass);
  auto a = read_json(dir / "a" / "hyper.json"), b = read_json(dir / "b" / "hyper.json");
  for (auto* j : {&a, &b}) {
    j->erase("wall_seconds");
    (*j)["config"].erase("workers");
  }
  CHECK(a == b);
  CHECK(slurp(dir / "a" / "hyper_norms.csv") == slurp(dir / "b" / "hyper_norms.csv"));
}

TEST_CASE("evolve and norms subcommands") {
  const auto dir = scratch("evolve");
  const auto cfg = write_json(dir, "e.json",
                              {{"equation", "kdv"},
                               {"cutoff", 8},
                               {"dt", 0.001},
                               {"T", 0.05},
                               {"observe_modes", {1, 8}},
                               {"initial", {{"measure", {{"kind", "white"}, {"cutoff", 8}, {"seed", 2}}}}}});
  auto r = run({"evolve", "--config", cfg.string(), "--out", dir.string()});
  CHECK(r.code == cli::kExitPass);
  const auto csv = slurp(dir / "observables.csv");
  CHECK(csv.rfind("t,l2,hamiltonian,abs_u1,abs_u8\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 52);
  REQUIRE(fs::exists(dir / "trajectory.jsonl"));

  const auto ncfg = write_json(dir, "n.json",
                               {{"trajectory_file", (dir / "trajectory.jsonl").string()},
                                {"norms", {{{"family", "xsb"}, {"s", -0.4}, {"b", 0.5}},
                                           {{"family", "fourier_lebesgue"}, {"s", 0.0}, {"p", "inf"}}}}});
  r = run({"norms", "--config", ncfg.string(), "--out", (dir / "n").string()});
  CHECK(r.code == cli::kExitPass);
  const auto norms = slurp(dir / "n" / "norms.csv");
  CHECK(norms.rfind("sample_id,family,s,b,p,q,value\n", 0) == 0);
  // one xsb row plus one row per snapshot
  CHECK(std::count(norms.begin(), norms.end(), '\n') == 1 + 1 + 51);

  const auto bad = write_json(dir, "nb.json", {{"norms", {{{"family", "sobolev"}}}}});
  CHECK(run({"norms", "--config", bad.string()}).code == cli::kExitError);
  const auto bad_field =
      write_json(dir, "eb.json", {{"cutoff", 8}, {"initial", {{"field", {{"cutoff", 4}, {"coeffs", {}}}}}}});
  CHECK(run({"evolve", "--config", bad_field.string()}).code == cli::kExitError);
}

TEST_CASE("committed example configs parse with their subcommand") {
  const std::map<std::string, std::function<void(const nlohmann::json&)>> parsers = {
      {"inv", [](const nlohmann::json& j) { invariance_config_from_json(j); }},
      {"converge", [](const nlohmann::json& j) { convergence_config_from_json(j); }},
      {"tails", [](const nlohmann::json& j) { tail_config_from_json(j); }},
      {"decay", [](const nlohmann::json& j) { decay_config_from_json(j); }},
      {"moments", [](const nlohmann::json& j) { moments_config_from_json(j); }},
      {"hyper", [](const nlohmann::json& j) { hyper_config_from_json(j); }},
      {"growth", [](const nlohmann::json& j) { growth_config_from_json(j); }},
      {"skdv", [](const nlohmann::json& j) { skdv_config_from_json(j); }},
  };
  const fs::path configs = fs::path(WNLAB_SOURCE_DIR) / "configs";
  REQUIRE(fs::exists(configs));
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(configs)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const auto stem = entry.path().stem().string();
    const auto prefix = stem.substr(0, stem.find('_'));
    const auto j = read_json(entry.path());
    INFO(stem);
    if (parsers.count(prefix)) CHECK_NOTHROW(parsers.at(prefix)(j));
  }
  CHECK(count >= 11);
}
