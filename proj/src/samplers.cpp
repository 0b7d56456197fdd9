#include "recon/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace recon {

namespace {
constexpr double kPi = std::numbers::pi;

std::string format17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace

std::string scheme_name(SchemeTag tag) {
  switch (tag) {
    case SchemeTag::kPoint: return "point";
    case SchemeTag::kDerivative: return "derivative";
    case SchemeTag::kExtrema: return "extrema";
    case SchemeTag::kIntegrateFire: return "integrate_fire";
    case SchemeTag::kMultichannelTem: return "multichannel_tem";
  }
  return "unknown";
}

void validate_family(const KernelFamily& family, double tol) {
  const int n = family.size();
  if (n == 0) throw std::invalid_argument("empty kernel family");
  if (family.norms.size() != n || static_cast<int>(family.index_map.size()) != n) {
    throw std::invalid_argument("kernel family metadata length mismatch");
  }
  for (int k = 0; k < n; ++k) {
    const double nk = norm(family.kernels[static_cast<size_t>(k)]);
    if (nk <= 0) throw std::invalid_argument("zero-norm kernel in family");
    if (std::abs(nk - family.norms[k]) > 1e-12 * std::max(1.0, nk)) {
      throw std::invalid_argument("cached kernel norm does not match kernel");
    }
  }
  if (family.orthogonal) {
    for (int j = 0; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const double g = inner_product(family.kernels[static_cast<size_t>(j)],
                                       family.kernels[static_cast<size_t>(k)]);
        if (std::abs(g) > tol * family.norms[j] * family.norms[k]) {
          throw std::invalid_argument("family flagged orthogonal but Gram is not");
        }
      }
    }
  }
}

namespace {
KernelFamily finalize_family(std::vector<MultiSignal> kernels, bool orthogonal,
                             std::vector<KernelLabel> labels, SchemeTag tag) {
  KernelFamily fam;
  fam.norms.resize(static_cast<Eigen::Index>(kernels.size()));
  for (size_t k = 0; k < kernels.size(); ++k) {
    fam.norms[static_cast<Eigen::Index>(k)] = norm(kernels[k]);
  }
  fam.kernels = std::move(kernels);
  fam.orthogonal = orthogonal;
  fam.index_map = std::move(labels);
  fam.scheme_tag = tag;
  return fam;
}
}  // namespace

KernelFamily point_kernels(const std::vector<double>& times, GridSpec spec) {
  if (times.empty()) throw std::invalid_argument("point_kernels: no times");
  for (size_t i = 1; i < times.size(); ++i) {
    if (times[i] <= times[i - 1]) {
      throw std::invalid_argument("point_kernels: times must be strictly increasing");
    }
  }
  std::vector<MultiSignal> kernels;
  std::vector<KernelLabel> labels;
  for (size_t i = 0; i < times.size(); ++i) {
    kernels.emplace_back(dirichlet_kernel(times[i], spec));
    labels.push_back({static_cast<int>(i), -1});
  }
  return finalize_family(std::move(kernels), false, std::move(labels),
                         SchemeTag::kPoint);
}

KernelFamily derivative_kernels(const std::vector<double>& times,
                                const std::vector<int>& orders, GridSpec spec) {
  if (times.size() != orders.size() || times.empty()) {
    throw std::invalid_argument("derivative_kernels: times/orders length mismatch");
  }
  for (size_t i = 0; i < times.size(); ++i) {
    if (orders[i] < 0) throw std::invalid_argument("derivative_kernels: order < 0");
    for (size_t j = i + 1; j < times.size(); ++j) {
      if (times[i] == times[j] && orders[i] == orders[j]) {
        throw std::invalid_argument("derivative_kernels: duplicate (time, order) pair");
      }
    }
  }
  std::vector<MultiSignal> kernels;
  std::vector<KernelLabel> labels;
  for (size_t i = 0; i < times.size(); ++i) {
    GridSignal d = dirichlet_kernel(times[i], spec);
    GridSignal h = spectral_derivative(d, orders[i]);
    if (orders[i] % 2 == 1) h *= -1.0;
    kernels.emplace_back(std::move(h));
    labels.push_back({static_cast<int>(i), -1});
  }
  return finalize_family(std::move(kernels), false, std::move(labels),
                         SchemeTag::kDerivative);
}

ExtremaResult find_extrema(const GridSignal& x) {
  if (!x.bandlimited()) {
    throw std::invalid_argument("find_extrema: input must be bandlimited");
  }
  const GridSignal dx = spectral_derivative(x, 1);
  const GridSignal ddx = spectral_derivative(x, 2);
  const double dmax = dx.values().cwiseAbs().maxCoeff();
  const double ddmax = ddx.values().cwiseAbs().maxCoeff();
  // roundoff in the spectral derivative leaves a tiny residual for constants
  if (dmax <= 1e-12 * std::max(1.0, x.values().cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("find_extrema: constant signal");
  }

  const FourierSeries fs(x);
  const GridSpec spec = x.spec();
  const int n = spec.grid_len();
  const double dt = spec.dt();
  const double T = spec.period;
  const double tol = 1e-11 * dmax;

  ExtremaResult out;
  for (int i = 0; i < n; ++i) {
    const double a = dx.values()[i];
    const double b = dx.values()[(i + 1) % n];
    if (!(a == 0.0 || a * b < 0.0)) continue;
    double lo = i * dt, hi = (i + 1) * dt;
    double tau = 0.5 * (lo + hi);
    bool converged = false;
    double glo = a;
    for (int it = 0; it < 30; ++it) {
      const double g = fs.eval(tau, 1);
      if (std::abs(g) <= tol) {
        converged = true;
        break;
      }
      // maintain the bracket
      if ((g > 0) == (glo > 0)) lo = tau; else hi = tau;
      const double gp = fs.eval(tau, 2);
      double next = gp != 0 ? tau - g / gp : 0.5 * (lo + hi);
      if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
      tau = next;
    }
    if (!converged) {
      // bisection fallback
      lo = i * dt;
      hi = (i + 1) * dt;
      glo = fs.eval(lo, 1);
      for (int it = 0; it < 200 && std::abs(fs.eval(tau, 1)) > tol; ++it) {
        tau = 0.5 * (lo + hi);
        const double g = fs.eval(tau, 1);
        if ((g > 0) == (glo > 0)) { lo = tau; glo = g; } else { hi = tau; }
      }
    }
    tau = std::fmod(tau, T);
    if (tau < 0) tau += T;
    if (std::abs(fs.eval(tau, 2)) < 1e-8 * ddmax) {
      out.degenerate.push_back(static_cast<int>(out.times.size()));
    }
    out.times.push_back(tau);
    out.values.push_back(fs.eval(tau));
  }
  return out;
}

KernelFamily extrema_kernels(const std::vector<double>& extrema_times,
                             GridSpec spec) {
  std::vector<double> times;
  std::vector<int> orders;
  for (double tau : extrema_times) {
    times.push_back(tau);
    orders.push_back(0);
    times.push_back(tau);
    orders.push_back(1);
  }
  KernelFamily fam = derivative_kernels(times, orders, spec);
  fam.scheme_tag = SchemeTag::kExtrema;
  return fam;
}

KernelFamily if_kernels(const std::vector<double>& partition, double alpha,
                        GridSpec spec) {
  if (partition.size() < 2) {
    throw std::invalid_argument("if_kernels: partition needs at least 2 boundaries");
  }
  if (alpha < 0) throw std::invalid_argument("if_kernels: alpha < 0");
  const double T = spec.period;
  if (partition.front() < 0 || partition.back() > T + 1e-12) {
    throw std::invalid_argument("if_kernels: partition outside [0, T]");
  }
  for (size_t i = 1; i < partition.size(); ++i) {
    if (partition[i] <= partition[i - 1]) {
      throw std::invalid_argument("if_kernels: partition must be strictly increasing");
    }
  }
  const int n = spec.grid_len();
  const double dt = spec.dt();
  std::vector<MultiSignal> kernels;
  std::vector<KernelLabel> labels;
  for (size_t j = 1; j < partition.size(); ++j) {
    const double a = partition[j - 1];
    const double b = partition[j];
    // grid points owned by [a, b): t_i in [a, b)
    const int i0 = static_cast<int>(std::ceil(a / dt - 1e-12));
    const int i1 = static_cast<int>(std::ceil(b / dt - 1e-12)) - 1;
    if (i1 < i0) {
      throw std::invalid_argument(
          "if_kernels: interval shorter than one grid step (raise rate_R)");
    }
    Eigen::VectorXd vals = Eigen::VectorXd::Zero(n);
    for (int i = i0; i <= i1; ++i) {
      double w = 1.0;
      if (i0 == i1) {
        w = (b - a) / dt;
      } else if (i == i0) {
        w = (i0 * dt + dt / 2 - a) / dt;
      } else if (i == i1) {
        w = (b - (i1 * dt - dt / 2)) / dt;
      }
      const double t = i * dt;
      vals[i % n] = w * std::exp(-alpha * (b - t));
    }
    kernels.emplace_back(GridSignal(spec, std::move(vals), false));
    labels.push_back({static_cast<int>(j) - 1, -1});
  }
  return finalize_family(std::move(kernels), true, std::move(labels),
                         SchemeTag::kIntegrateFire);
}

namespace {
/// Antiderivative of a bandlimited signal, F(0) = 0.
class Antiderivative {
 public:
  explicit Antiderivative(const GridSignal& x)
      : period_(x.spec().period), coeffs_(band_spectrum(x)) {}

  double eval(double t) const {
    const int mmax = static_cast<int>((coeffs_.size() - 1) / 2);
    double acc = coeffs_[mmax].real() * t;
    for (int m = 1; m <= mmax; ++m) {
      const double w = 2.0 * kPi * m / period_;
      const std::complex<double> c = coeffs_[mmax + m];
      acc += 2.0 * (c.real() * std::sin(w * t) + c.imag() * (std::cos(w * t) - 1.0)) / w;
    }
    return acc;
  }

 private:
  int period_;
  Eigen::VectorXcd coeffs_;
};
}  // namespace

SpikeTrain encode_if(const GridSignal& x, double bias, double threshold) {
  if (!x.bandlimited()) {
    throw std::invalid_argument("encode_if: input must be bandlimited");
  }
  if (threshold <= 0) throw std::invalid_argument("encode_if: threshold <= 0");
  const double xmax = x.values().cwiseAbs().maxCoeff();
  if (bias <= xmax) {
    throw std::invalid_argument("encode_if: bias must exceed max|x|");
  }
  const double T = x.spec().period;
  const Antiderivative F(x);
  const FourierSeries fs(x);
  auto g = [&](double t) { return F.eval(t) + bias * t; };

  SpikeTrain train;
  train.times.push_back(0.0);
  double t_prev = 0.0;
  double target = threshold;
  const double tol = 1e-10 * threshold;
  while (true) {
    // bracket the next spike; integrator slope is in [bias - xmax, bias + xmax]
    double lo = t_prev;
    double hi = t_prev + threshold / (bias - xmax) + 1e-9;
    while (g(hi) < target) hi += threshold / (bias - xmax);
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
      const double r = g(t) - target;
      if (std::abs(r) <= tol) break;
      if (r < 0) lo = t; else hi = t;
      const double slope = fs.eval(t) + bias;
      double next = t - r / slope;
      if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
      t = next;
    }
    if (t > T) break;
    train.times.push_back(t);
    train.samples.push_back(threshold - bias * (t - t_prev));
    t_prev = t;
    target += threshold;
  }
  if (train.interval_count() < 2) {
    throw std::domain_error("encode_if: fewer than 2 spikes per period");
  }
  return train;
}

SampleRecord sample(const MultiSignal& x, const KernelFamily& family) {
  if (x.channel_count() != family.channel_count() ||
      !(x.spec() == family.spec())) {
    throw std::invalid_argument("sample: signal/family dimension mismatch");
  }
  SampleRecord rec;
  const int n = family.size();
  rec.raw.resize(n);
  rec.normalized.resize(n);
  for (int k = 0; k < n; ++k) {
    rec.raw[k] = inner_product(x, family.kernels[static_cast<size_t>(k)]);
    rec.normalized[k] = rec.raw[k] / family.norms[k];
  }
  rec.family_ref = scheme_name(family.scheme_tag);
  return rec;
}

SampleRecord sample(const GridSignal& x, const KernelFamily& family) {
  return sample(MultiSignal(x), family);
}

SampleRecord add_noise(const SampleRecord& record, const KernelFamily& family,
                       double sigma, std::uint64_t seed) {
  if (sigma < 0) throw std::invalid_argument("add_noise: sigma < 0");
  if (sigma == 0) return record;
  SampleRecord out = record;
  std::mt19937_64 rng(derive_seed(seed, 0xadd001));
  std::normal_distribution<double> gauss(0.0, sigma);
  Eigen::VectorXd e(record.raw.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = gauss(rng);
  out.raw = record.raw + e;
  out.normalized = out.raw.cwiseQuotient(family.norms);
  out.noise = e;
  return out;
}

std::string spike_train_to_text(const SpikeTrain& train, SchemeTag scheme,
                                GridSpec spec) {
  std::ostringstream os;
  os << scheme_name(scheme) << "," << spec.period << "," << spec.rate << ","
     << train.times.size() << "\n";
  for (size_t j = 0; j < train.times.size(); ++j) {
    const double s = j == 0 ? 0.0 : train.samples[j - 1];
    os << format17(train.times[j]) << "," << format17(s) << "\n";
  }
  return os.str();
}

SpikeTrain spike_train_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string header;
  if (!std::getline(is, header)) {
    throw std::invalid_argument("spike_train_from_text: empty input");
  }
  const auto last_comma = header.rfind(',');
  const size_t count = std::stoul(header.substr(last_comma + 1));
  SpikeTrain train;
  std::string line;
  for (size_t j = 0; j < count; ++j) {
    if (!std::getline(is, line)) {
      throw std::invalid_argument("spike_train_from_text: truncated input");
    }
    const auto comma = line.find(',');
    train.times.push_back(std::stod(line.substr(0, comma)));
    if (j > 0) train.samples.push_back(std::stod(line.substr(comma + 1)));
  }
  for (size_t j = 1; j < train.times.size(); ++j) {
    if (train.times[j] <= train.times[j - 1]) {
      throw std::invalid_argument("spike_train_from_text: times not increasing");
    }
  }
  return train;
}

}  // namespace recon
