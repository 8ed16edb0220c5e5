#include "wnlab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "wnlab/config.hpp"
#include "wnlab/error.hpp"
#include "wnlab/stats.hpp"

namespace wnlab {

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::white: return "white";
    case MeasureKind::mu_beta: return "mu_beta";
    case MeasureKind::mu_tilde_beta: return "mu_tilde_beta";
    case MeasureKind::rho_beta: return "rho_beta";
  }
  return "unknown";
}

MeasureKind measure_kind_from_string(const std::string& name) {
  if (name == "white") return MeasureKind::white;
  if (name == "mu_beta") return MeasureKind::mu_beta;
  if (name == "mu_tilde_beta") return MeasureKind::mu_tilde_beta;
  if (name == "rho_beta") return MeasureKind::rho_beta;
  throw InvalidArgument("unknown measure kind '" + name + "'");
}

void MeasureSpec::validate() const {
  if (cutoff < 1) throw InvalidArgument("MeasureSpec: cutoff must be >= 1");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("MeasureSpec: beta must be finite and >= 0");
  if (kind != MeasureKind::white && kind != MeasureKind::mu_beta && beta <= 0.0)
    throw InvalidArgument("MeasureSpec: beta must be > 0 for " + to_string(kind));
  if (kind == MeasureKind::mu_beta && beta < 0.0)
    throw InvalidArgument("MeasureSpec: beta must be >= 0");
  if (kind == MeasureKind::rho_beta) {
    if (p != 3 && p != 4) throw InvalidArgument("MeasureSpec: p must be 3 or 4");
    if (!(K > 0.0)) throw InvalidArgument("MeasureSpec: K must be > 0");
  }
  if (kind == MeasureKind::mu_tilde_beta) {
    // The smallest precision is at n = 1.
    const double shift = 12.0 * beta * a_beta(beta, cutoff);
    if (!(1.0 - shift + beta > 0.0))
      throw InvalidArgument("MeasureSpec: mu_tilde_beta undefined, 1 - 12 beta a_beta + beta <= 0");
  }
}

nlohmann::json to_json(const MeasureSpec& spec) {
  return {{"kind", to_string(spec.kind)}, {"beta", spec.beta}, {"p", spec.p},
          {"K", spec.K},                  {"cutoff", spec.cutoff}, {"seed", spec.seed}};
}

MeasureSpec measure_spec_from_json(const nlohmann::json& j, const std::string& prefix) {
  ConfigReader r(j, prefix);
  MeasureSpec s;
  const auto kind = r.require<std::string>("kind");
  try {
    s.kind = measure_kind_from_string(kind);
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.path("kind"), e.what());
  }
  s.beta = r.get("beta", 0.0);
  s.p = r.get("p", 4);
  s.K = r.get("K", 10.0);
  s.cutoff = r.require<int>("cutoff");
  s.seed = r.get("seed", std::uint64_t{0});
  r.finish();
  try {
    s.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(prefix.empty() ? "<measure>" : prefix, e.what());
  }
  return s;
}

std::vector<double> mode_scales(const MeasureSpec& spec) {
  std::vector<double> scales(static_cast<std::size_t>(spec.cutoff), 1.0);
  if (spec.kind == MeasureKind::white) return scales;
  const double shift =
      spec.kind == MeasureKind::mu_tilde_beta ? 12.0 * spec.beta * a_beta(spec.beta, spec.cutoff) : 0.0;
  for (int n = 1; n <= spec.cutoff; ++n)
    scales[static_cast<std::size_t>(n - 1)] =
        1.0 / std::sqrt(1.0 - shift + spec.beta * static_cast<double>(n) * n);
  return scales;
}

namespace {

WeightedSample draw(const MeasureSpec& spec, std::span<const double> scales, Rng& rng) {
  std::vector<Complex> c(scales.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = scales[k] * rng.complex_normal();
  WeightedSample s{FourierField(std::move(c)), 0.0};
  if (spec.kind == MeasureKind::rho_beta) {
    const double bound = spec.K / std::sqrt(spec.beta);
    s.log_weight = l2_squared(s.field) <= bound
                       ? spec.beta * integral_power(s.field, spec.p)
                       : -std::numeric_limits<double>::infinity();
  }
  return s;
}

}  // namespace

WeightedSample sample(const MeasureSpec& spec, Rng& rng) {
  spec.validate();
  const auto scales = mode_scales(spec);
  return draw(spec, scales, rng);
}

std::vector<WeightedSample> sample_batch(const MeasureSpec& spec, std::size_t count) {
  spec.validate();
  const auto scales = mode_scales(spec);
  std::vector<WeightedSample> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    Rng rng(spec.seed, j);
    out.push_back(draw(spec, scales, rng));
  }
  return out;
}

double a_beta(double beta, int cutoff) {
  if (!(beta > 0.0)) throw InvalidArgument("a_beta: beta must be > 0");
  stats::CompensatedSum s;
  for (int n = cutoff; n >= 1; --n) s.add(1.0 / (1.0 + beta * static_cast<double>(n) * n));
  return 2.0 * s.value();
}

double wick2(const FourierField& u, double beta, int cutoff) {
  return l2_squared(u) - a_beta(beta, cutoff);
}

double wick4(const FourierField& u, double beta, int cutoff) {
  const double a = a_beta(beta, cutoff);
  return integral_power(u, 4) - 6.0 * a * l2_squared(u) + 3.0 * a * a;
}

double wick2_second_moment(double beta, int cutoff) {
  stats::CompensatedSum s;
  for (int n = cutoff; n >= 1; --n) {
    const double w = 1.0 / (1.0 + beta * static_cast<double>(n) * n);
    s.add(w * w);
  }
  return 4.0 * s.value();
}

QuartetIndex::QuartetIndex(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 1) throw InvalidArgument("QuartetIndex: cutoff must be >= 1");
  const int N = cutoff;
  for (int n1 = -N; n1 <= N; ++n1) {
    if (n1 == 0) continue;
    for (int n2 = n1 + 1; n2 <= N; ++n2) {
      if (n2 == 0 || n1 + n2 == 0) continue;
      for (int n3 = n2 + 1; n3 <= N; ++n3) {
        if (n3 == 0 || n1 + n3 == 0 || n2 + n3 == 0) continue;
        const int n4 = -(n1 + n2 + n3);
        if (n4 <= n3 || n4 > N) continue;
        if (n1 + n4 == 0 || n2 + n4 == 0 || n3 + n4 == 0) continue;
        sets_.push_back({n1, n2, n3, n4});
      }
    }
  }
}

double q_beta(const QuartetIndex& index, std::span<const Complex> gaussians, double beta) {
  const int N = index.cutoff();
  if (static_cast<int>(gaussians.size()) < N)
    throw InvalidArgument("q_beta: need g_1..g_N");
  // v[n + N] = g_n / sqrt(1 + beta n^2), Hermitian-extended.
  std::vector<Complex> v(static_cast<std::size_t>(2 * N + 1));
  for (int n = 1; n <= N; ++n) {
    const Complex x = gaussians[static_cast<std::size_t>(n - 1)] /
                      std::sqrt(1.0 + beta * static_cast<double>(n) * n);
    v[static_cast<std::size_t>(N + n)] = x;
    v[static_cast<std::size_t>(N - n)] = std::conj(x);
  }
  stats::CompensatedSum re;
  for (const auto& s : index.sets()) {
    const Complex prod = v[static_cast<std::size_t>(s[0] + N)] * v[static_cast<std::size_t>(s[1] + N)] *
                         v[static_cast<std::size_t>(s[2] + N)] * v[static_cast<std::size_t>(s[3] + N)];
    re.add(prod.real());
  }
  return 24.0 * beta * re.value();
}

double q_beta(std::span<const Complex> gaussians, double beta, int cutoff) {
  return q_beta(QuartetIndex(cutoff), gaussians, beta);
}

double q_beta_second_moment(const QuartetIndex& index, double beta) {
  stats::CompensatedSum s;
  for (const auto& q : index.sets()) {
    double prod = 1.0;
    for (int n : q) prod /= 1.0 + beta * static_cast<double>(n) * n;
    s.add(prod);
  }
  return 576.0 * beta * beta * s.value();
}

std::complex<double> char_functional(std::span<const WeightedSample> samples,
                                     const TestFunction& f) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) top = std::max(top, s.log_weight);
  if (!std::isfinite(top))
    throw DegenerateWeights("char_functional: every importance weight is zero");
  stats::CompensatedSum num_re, num_im, den;
  for (const auto& s : samples) {
    if (!std::isfinite(s.log_weight)) continue;
    const double w = std::exp(s.log_weight - top);
    const double phase = pairing(f, s.field);
    num_re.add(w * std::cos(phase));
    num_im.add(w * std::sin(phase));
    den.add(w);
  }
  return {num_re.value() / den.value(), num_im.value() / den.value()};
}

double gaussian_char_functional(std::span<const double> scales, const TestFunction& f) {
  const auto fm = f.shape().modes();
  const std::size_t n = std::min(fm.size(), scales.size());
  double e = 0.0;
  for (std::size_t k = 0; k < n; ++k) e += std::norm(fm[k]) * scales[k] * scales[k];
  return std::exp(-e);
}

void write_samples_jsonl(std::ostream& os, const MeasureSpec& spec,
                         std::span<const WeightedSample> samples) {
  nlohmann::json header = {{"header", {{"measure", to_json(spec)},
                                       {"seed", spec.seed},
                                       {"count", samples.size()},
                                       {"stream_scheme", "splitmix64(seed, sample_index)"}}}};
  os << header.dump() << '\n';
  for (const auto& s : samples) {
    nlohmann::json line = {{"field", to_json(s.field)}};
    if (std::isfinite(s.log_weight)) {
      line["weight"] = s.weight();
      line["log_weight"] = s.log_weight;
    } else {
      line["weight"] = 0.0;
      line["log_weight"] = nullptr;
    }
    os << line.dump() << '\n';
  }
}

std::vector<WeightedSample> read_samples_jsonl(std::istream& is, MeasureSpec* spec) {
  std::vector<WeightedSample> out;
  std::string line;
  bool seen_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (!seen_header) {
      if (!j.contains("header")) throw InvalidArgument("samples JSONL: first line must be a header");
      if (spec != nullptr) *spec = measure_spec_from_json(j.at("header").at("measure"));
      seen_header = true;
      continue;
    }
    WeightedSample s{field_from_json(j.at("field")), 0.0};
    const auto& lw = j.at("log_weight");
    s.log_weight = lw.is_null() ? -std::numeric_limits<double>::infinity() : lw.get<double>();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace wnlab
