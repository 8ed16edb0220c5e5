#include "wnlab/norms.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "wnlab/error.hpp"

namespace wnlab {

std::string to_string(NormFamily family) {
  switch (family) {
    case NormFamily::sobolev: return "sobolev";
    case NormFamily::besov_hat: return "besov_hat";
    case NormFamily::fourier_lebesgue: return "fourier_lebesgue";
    case NormFamily::xsb: return "xsb";
    case NormFamily::xsbpq: return "xsbpq";
  }
  return "unknown";
}

NormFamily norm_family_from_string(const std::string& name) {
  if (name == "sobolev") return NormFamily::sobolev;
  if (name == "besov_hat") return NormFamily::besov_hat;
  if (name == "fourier_lebesgue") return NormFamily::fourier_lebesgue;
  if (name == "xsb") return NormFamily::xsb;
  if (name == "xsbpq") return NormFamily::xsbpq;
  throw InvalidArgument("unknown norm family '" + name + "'");
}

void NormSpec::validate() const {
  if (!(p >= 1.0)) throw InvalidArgument("NormSpec: p must be >= 1");
  if (!(q >= 1.0)) throw InvalidArgument("NormSpec: q must be >= 1");
}

void Trajectory::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("Trajectory: dt must be > 0");
  for (const auto& f : fields)
    if (f.cutoff() != fields.front().cutoff())
      throw InvalidArgument("Trajectory: snapshots must share one cutoff");
}

namespace {

double bracket(double n) { return 1.0 + std::abs(n); }

// Accumulates sum |x|^p (or max |x| when p is infinite).
class LpAccumulator {
 public:
  explicit LpAccumulator(double p) : p_(p) {}
  void add(double magnitude) {
    if (std::isinf(p_))
      acc_ = std::max(acc_, magnitude);
    else
      acc_ += std::pow(magnitude, p_);
  }
  double norm() const { return std::isinf(p_) ? acc_ : std::pow(acc_, 1.0 / p_); }

 private:
  double p_;
  double acc_ = 0.0;
};

// Mixed norm sup_j || w_n a_n ||_{l^p(block j)}; `values(n)` gives the
// weighted magnitude of mode n (n of either sign).
template <typename F>
double dyadic_sup(int cutoff, double p, F&& values) {
  double best = 0.0;
  for (int j = 0; (1 << j) <= cutoff; ++j) {
    LpAccumulator acc(p);
    const int lo = 1 << j;
    const int hi = std::min((1 << (j + 1)) - 1, cutoff);
    for (int n = lo; n <= hi; ++n) {
      acc.add(values(n));
      acc.add(values(-n));
    }
    best = std::max(best, acc.norm());
  }
  return best;
}

}  // namespace

double spatial_norm(const FourierField& u, const NormSpec& spec) {
  spec.validate();
  const int N = u.cutoff();
  auto weighted = [&](int n) { return std::pow(bracket(n), spec.s) * std::abs(u.coeff(n)); };
  switch (spec.family) {
    case NormFamily::sobolev: {
      double acc = 0.0;
      for (int n = 1; n <= N; ++n) acc += 2.0 * std::pow(weighted(n), 2.0);
      return std::sqrt(acc);
    }
    case NormFamily::besov_hat:
      return dyadic_sup(N, spec.p, weighted);
    case NormFamily::fourier_lebesgue: {
      LpAccumulator acc(spec.p);
      for (int n = 1; n <= N; ++n) {
        acc.add(weighted(n));
        acc.add(weighted(-n));
      }
      return acc.norm();
    }
    default:
      throw InvalidArgument("spatial_norm: family must be sobolev, besov_hat or fourier_lebesgue");
  }
}

namespace {

// |u~(n, tau)| <tau - n^3>^b on the K window-dual frequencies centered on n^3,
// for n in -N..N (index n + N; n = 0 unused).
std::vector<std::vector<double>> modulated_spectra(const Trajectory& traj, double b) {
  const int K = static_cast<int>(traj.fields.size()) - 1;
  const int N = traj.fields.front().cutoff();
  const double T = traj.dt * K;
  const double dtau = 2.0 * M_PI / T;

  ComplexDft dft(K);
  std::vector<std::vector<double>> spectra(static_cast<std::size_t>(2 * N + 1));
  for (int n = -N; n <= N; ++n) {
    if (n == 0) continue;
    auto in = dft.input();
    for (int j = 0; j < K; ++j) in[static_cast<std::size_t>(j)] = traj.fields[static_cast<std::size_t>(j)].coeff(n);
    dft.forward();
    const auto out = dft.output();
    const double omega = static_cast<double>(n) * n * n;
    const auto center = static_cast<long long>(std::llround(omega / dtau));
    const long long first = center - K / 2;
    auto& row = spectra[static_cast<std::size_t>(n + N)];
    row.resize(static_cast<std::size_t>(K));
    for (long long k = first; k < first + K; ++k) {
      const auto idx = static_cast<std::size_t>(((k % K) + K) % K);
      const double mag = traj.dt * std::abs(out[idx]);
      const double tau = dtau * static_cast<double>(k);
      row[static_cast<std::size_t>(k - first)] = mag * std::pow(bracket(tau - omega), b);
    }
  }

  return spectra;
}

}  // namespace

double xsb_norm(const Trajectory& traj, const NormSpec& spec) {
  spec.validate();
  traj.validate();
  if (traj.fields.size() < 2) throw InvalidArgument("xsb_norm: trajectory needs >= 2 snapshots");
  if (spec.family != NormFamily::xsb && spec.family != NormFamily::xsbpq)
    throw InvalidArgument("xsb_norm: family must be xsb or xsbpq");

  const int N = traj.fields.front().cutoff();
  const double T = traj.dt * static_cast<double>(traj.fields.size() - 1);
  const auto spectra = modulated_spectra(traj, spec.b);

  // L^q_tau with measure dtau/2pi, i.e. (1/T) per discrete frequency.
  auto time_norm = [&](int n, double q) {
    const auto& row = spectra[static_cast<std::size_t>(n + N)];
    if (std::isinf(q)) {
      double m = 0.0;
      for (double v : row) m = std::max(m, v);
      return m;
    }
    double acc = 0.0;
    for (double v : row) acc += std::pow(v, q);
    return std::pow(acc / T, 1.0 / q);
  };

  if (spec.family == NormFamily::xsb) {
    double acc = 0.0;
    for (int n = -N; n <= N; ++n) {
      if (n == 0) continue;
      acc += std::pow(bracket(n), 2.0 * spec.s) * std::pow(time_norm(n, 2.0), 2.0);
    }
    return std::sqrt(acc);
  }
  return dyadic_sup(N, spec.p, [&](int n) { return std::pow(bracket(n), spec.s) * time_norm(n, spec.q); });
}

void write_norms_csv(std::ostream& os, std::span<const NormRecord> rows) {
  os << "sample_id,family,s,b,p,q,value\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << r.sample_id << ',' << to_string(r.spec.family) << ',' << r.spec.s << ',' << r.spec.b
       << ',' << r.spec.p << ',' << r.spec.q << ',' << r.value << '\n';
}

}  // namespace wnlab
