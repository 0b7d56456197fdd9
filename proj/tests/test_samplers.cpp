// Unit tests of the sampling schemes: point, derivative, extrema,
// integrate-and-fire kernels, spike encoding, noise, serialization.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "recon/grid.hpp"
#include "recon/samplers.hpp"

using namespace recon;

namespace {

constexpr double kPi = std::numbers::pi;

GridSignal harmonic_cos(GridSpec spec, int m) {
  Eigen::VectorXd v(spec.grid_len());
  for (int i = 0; i < v.size(); ++i) {
    v[i] = std::cos(2.0 * kPi * m * i / spec.grid_len());
  }
  return GridSignal(spec, v, true);
}

// Riemann quadrature of x over [a, b] with fractional end cells, matching
// the kernel construction's O(dt^2) boundary treatment.
double integral_over(const GridSignal& x, double a, double b) {
  const FourierSeries fs(x);
  // Simpson on a fine subdivision; plenty for an oracle
  const int n = 4000;
  const double h = (b - a) / n;
  double acc = fs.eval(a) + fs.eval(b);
  for (int i = 1; i < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * fs.eval(a + i * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("point kernels") {
  const GridSpec spec = make_grid(41, 16);
  const std::vector<double> times{0.8, 5.3, 12.0, 30.77};

  SUBCASE("sampling equals Fourier point evaluation") {
    const KernelFamily fam = point_kernels(times, spec);
    validate_family(fam);
    for (int trial = 0; trial < 50; ++trial) {
      const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat,
                                              static_cast<std::uint64_t>(trial));
      const SampleRecord rec = sample(x, fam);
      const FourierSeries fs(x);
      for (size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(rec.raw[static_cast<long>(k)] - fs.eval(times[k])) <= 1e-10);
      }
    }
  }

  SUBCASE("kernel centered at t0 samples itself to 1") {
    const KernelFamily fam = point_kernels({5.3}, spec);
    const GridSignal d = dirichlet_kernel(5.3, spec);
    CHECK(sample(d, fam).raw[0] == doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("duplicate or decreasing times are rejected") {
    CHECK_THROWS_AS(point_kernels({1.0, 1.0}, spec), std::invalid_argument);
    CHECK_THROWS_AS(point_kernels({2.0, 1.0}, spec), std::invalid_argument);
  }
}

TEST_CASE("derivative kernels") {
  const GridSpec spec = make_grid(41, 16);

  SUBCASE("order 0 reduces to point kernels") {
    const std::vector<double> times{1.5, 9.25};
    const KernelFamily der = derivative_kernels(times, {0, 0}, spec);
    const KernelFamily pts = point_kernels(times, spec);
    for (int k = 0; k < 2; ++k) {
      const auto diff = der.kernels[static_cast<size_t>(k)].channel(0).values() -
                        pts.kernels[static_cast<size_t>(k)].channel(0).values();
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("samples the spectral derivative at t_k") {
    const std::vector<double> times{3.3, 17.0, 22.9};
    const std::vector<int> orders{1, 2, 1};
    const KernelFamily fam = derivative_kernels(times, orders, spec);
    for (int trial = 0; trial < 20; ++trial) {
      const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat,
                                              100 + static_cast<std::uint64_t>(trial));
      const SampleRecord rec = sample(x, fam);
      const FourierSeries fs(x);
      for (size_t k = 0; k < times.size(); ++k) {
        CHECK(std::abs(rec.raw[static_cast<long>(k)] -
                       fs.eval(times[k], orders[k])) <= 1e-9);
      }
    }
  }

  SUBCASE("first-derivative sample vanishes at an extremum") {
    const GridSignal x = random_bandlimited(spec, SpectrumProfile::kLinearIncreasing, 3);
    const ExtremaResult ex = find_extrema(x);
    REQUIRE(!ex.times.empty());
    const KernelFamily fam = derivative_kernels({ex.times[0]}, {1}, spec);
    CHECK(std::abs(sample(x, fam).raw[0]) <= 1e-9);
  }

  SUBCASE("duplicate (time, order) pairs are rejected") {
    CHECK_THROWS_AS(derivative_kernels({1.0, 1.0}, {1, 1}, spec),
                    std::invalid_argument);
    CHECK_NOTHROW(derivative_kernels({1.0, 1.0}, {0, 1}, spec));
  }
}

TEST_CASE("find_extrema") {
  const GridSpec spec = make_grid(41, 16);

  SUBCASE("pure harmonic has 2m extrema of value +-1") {
    for (int m : {1, 3, 8}) {
      const ExtremaResult ex = find_extrema(harmonic_cos(spec, m));
      CHECK(static_cast<int>(ex.times.size()) == 2 * m);
      for (size_t i = 0; i < ex.values.size(); ++i) {
        CHECK(std::abs(std::abs(ex.values[i]) - 1.0) <= 1e-10);
        if (i > 0) {
          // half-period spacing
          CHECK(ex.times[i] - ex.times[i - 1] ==
                doctest::Approx(41.0 / (2.0 * m)).epsilon(1e-8));
        }
      }
    }
  }

  SUBCASE("refined times agree with detection on a much finer grid") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const GridSignal x =
          random_bandlimited(spec, SpectrumProfile::kLinearIncreasing, 500 + s);
      const GridSignal xf =
          signal_from_spectrum(make_grid(41, 128), band_spectrum(x));
      const ExtremaResult a = find_extrema(x);
      const ExtremaResult b = find_extrema(xf);
      REQUIRE(a.times.size() == b.times.size());
      for (size_t i = 0; i < a.times.size(); ++i) {
        CHECK(std::abs(a.times[i] - b.times[i]) <= 1e-9);
      }
    }
  }

  SUBCASE("derivative is zero at every reported extremum") {
    const GridSignal x = random_bandlimited(spec, SpectrumProfile::kLinearIncreasing, 77);
    const FourierSeries fs(x);
    double dmax = 0;
    for (int i = 0; i < spec.grid_len(); ++i) {
      dmax = std::max(dmax, std::abs(fs.eval(i * spec.dt(), 1)));
    }
    for (double t : find_extrema(x).times) {
      CHECK(std::abs(fs.eval(t, 1)) <= 1e-11 * dmax);
    }
  }

  SUBCASE("rejects non-bandlimited and constant inputs") {
    Eigen::VectorXd raw = Eigen::VectorXd::Random(spec.grid_len());
    CHECK_THROWS_AS(find_extrema(GridSignal(spec, raw)), std::invalid_argument);
    CHECK_THROWS_AS(find_extrema(GridSignal(spec, Eigen::VectorXd::Ones(spec.grid_len()), true)),
                    std::invalid_argument);
  }
}

TEST_CASE("extrema kernel family structure") {
  const GridSpec spec = make_grid(41, 16);
  const GridSignal x = random_bandlimited(spec, SpectrumProfile::kLinearIncreasing, 12);
  const ExtremaResult ex = find_extrema(x);
  const KernelFamily fam = extrema_kernels(ex.times, spec);
  REQUIRE(fam.size() == 2 * static_cast<int>(ex.times.size()));
  const SampleRecord rec = sample(x, fam);
  for (size_t i = 0; i < ex.times.size(); ++i) {
    // even index: amplitude value; odd index: zero derivative
    CHECK(rec.raw[2 * static_cast<long>(i)] ==
          doctest::Approx(ex.values[i]).epsilon(1e-9));
    CHECK(std::abs(rec.raw[2 * static_cast<long>(i) + 1]) <= 1e-9);
  }
}

TEST_CASE("integrate-and-fire kernels") {
  const GridSpec spec = make_grid(41, 16);
  const std::vector<double> part{0.3, 1.7, 2.05, 4.0, 7.33, 11.5};

  SUBCASE("alpha = 0 samples interval integrals; norms match lengths") {
    const KernelFamily fam = if_kernels(part, 0.0, spec);
    validate_family(fam);
    CHECK(fam.orthogonal);
    const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat, 21);
    const SampleRecord rec = sample(x, fam);
    for (int k = 0; k < fam.size(); ++k) {
      const double oracle = integral_over(x, part[static_cast<size_t>(k)],
                                          part[static_cast<size_t>(k) + 1]);
      // the kernel quadrature uses fractional boundary cells, an O(dt^2) rule
      CHECK(std::abs(rec.raw[k] - oracle) <= 1e-3);
      const double len = part[static_cast<size_t>(k) + 1] - part[static_cast<size_t>(k)];
      // boundary cells carry weights in (1/2, 3/2], so the norm matches to O(dt)
      CHECK(std::abs(fam.norms[k] * fam.norms[k] - len) <= 1.5 * spec.dt());
    }
  }

  SUBCASE("off-diagonal Gram entries are exactly zero") {
    const KernelFamily fam = if_kernels(part, 0.0, spec);
    for (int j = 0; j < fam.size(); ++j) {
      for (int k = j + 1; k < fam.size(); ++k) {
        CHECK(inner_product(fam.kernels[static_cast<size_t>(j)],
                            fam.kernels[static_cast<size_t>(k)]) == 0.0);
      }
    }
  }

  SUBCASE("leaky kernels integrate a constant to the closed form") {
    const double alpha = 1.0;
    const KernelFamily fam = if_kernels(part, alpha, spec);
    const GridSignal one(spec, Eigen::VectorXd::Ones(spec.grid_len()), true);
    const SampleRecord rec = sample(one, fam);
    for (int k = 0; k < fam.size(); ++k) {
      const double len = part[static_cast<size_t>(k) + 1] - part[static_cast<size_t>(k)];
      const double oracle = (1.0 - std::exp(-alpha * len)) / alpha;
      CHECK(rec.raw[k] == doctest::Approx(oracle).epsilon(5e-3));
    }
  }

  SUBCASE("sub-grid intervals are rejected") {
    // an interval that owns no grid point cannot be represented
    CHECK_THROWS_AS(if_kernels({1.01, 1.01 + 0.2 * spec.dt()}, 0.0, spec),
                    std::invalid_argument);
  }
}

TEST_CASE("encode_if") {
  const GridSpec spec = make_grid(41, 16);

  SUBCASE("zero input gives uniform spikes with zero samples") {
    const GridSignal z(spec, Eigen::VectorXd::Zero(spec.grid_len()), true);
    const SpikeTrain tr = encode_if(z, 2.0, 0.5);
    REQUIRE(tr.interval_count() >= 2);
    for (int j = 0; j < tr.interval_count(); ++j) {
      CHECK(tr.times[static_cast<size_t>(j) + 1] - tr.times[static_cast<size_t>(j)] ==
            doctest::Approx(0.25).epsilon(1e-9));
      CHECK(std::abs(tr.samples[static_cast<size_t>(j)]) <= 1e-9);
    }
  }

  SUBCASE("recovered samples match direct quadrature") {
    const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat, 31);
    const double bias = 1.3 * x.values().cwiseAbs().maxCoeff();
    const SpikeTrain tr = encode_if(x, bias, bias / 1.2);
    for (int j = 0; j < tr.interval_count(); ++j) {
      const double oracle = integral_over(x, tr.times[static_cast<size_t>(j)],
                                          tr.times[static_cast<size_t>(j) + 1]);
      CHECK(std::abs(tr.samples[static_cast<size_t>(j)] - oracle) <= 1e-9);
    }
  }

  SUBCASE("spike count tracks the oversampling ratio bias/threshold") {
    const double target_osr = 1.04;
    double count_sum = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
      const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat,
                                              900 + static_cast<std::uint64_t>(trial));
      const double bias = 1.25 * x.values().cwiseAbs().maxCoeff();
      const SpikeTrain tr = encode_if(x, bias, bias / target_osr);
      count_sum += tr.interval_count();
      CHECK(std::abs(tr.interval_count() - target_osr * spec.period) <= 2.0);
    }
    CHECK(std::abs(count_sum / trials - target_osr * spec.period) <= 1.0);
  }

  SUBCASE("precondition failures") {
    const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat, 1);
    const double peak = x.values().cwiseAbs().maxCoeff();
    CHECK_THROWS_AS(encode_if(x, 0.5 * peak, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(encode_if(x, 2.0 * peak, -1.0), std::invalid_argument);
  }
}

TEST_CASE("sample record and noise") {
  const GridSpec spec = make_grid(41, 16);
  const KernelFamily fam = if_kernels({0.0, 2.0, 5.0, 9.0, 14.5}, 0.0, spec);

  SUBCASE("normalization and linearity") {
    const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat, 51);
    const GridSignal y = random_bandlimited(spec, SpectrumProfile::kFlat, 52);
    const SampleRecord rx = sample(x, fam), ry = sample(y, fam);
    const SampleRecord rz = sample(2.0 * x + (-0.5) * y, fam);
    for (int k = 0; k < fam.size(); ++k) {
      CHECK(rx.normalized[k] * fam.norms[k] == doctest::Approx(rx.raw[k]).epsilon(1e-12));
      CHECK(rz.raw[k] == doctest::Approx(2.0 * rx.raw[k] - 0.5 * ry.raw[k]).epsilon(1e-11));
    }
    const SampleRecord r0 = sample(GridSignal::zero(spec), fam);
    CHECK(r0.raw.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("noise determinism and statistics") {
    const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat, 53);
    const SampleRecord clean = sample(x, fam);
    CHECK((add_noise(clean, fam, 0.0, 9).raw - clean.raw).cwiseAbs().maxCoeff() == 0.0);
    const SampleRecord a = add_noise(clean, fam, 0.3, 9);
    const SampleRecord b = add_noise(clean, fam, 0.3, 9);
    CHECK((a.raw - b.raw).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(a.noise.has_value());

    double ss = 0;
    long n = 0;
    for (std::uint64_t s = 0; s < 20000; ++s) {
      const SampleRecord r = add_noise(clean, fam, 0.3, s);
      ss += r.noise->squaredNorm();
      n += r.noise->size();
    }
    CHECK(std::sqrt(ss / n) == doctest::Approx(0.3).epsilon(0.02));
  }
}

TEST_CASE("spike train serialization round-trip") {
  const GridSpec spec = make_grid(41, 16);
  const GridSignal x = random_bandlimited(spec, SpectrumProfile::kFlat, 61);
  const double bias = 1.25 * x.values().cwiseAbs().maxCoeff();
  const SpikeTrain tr = encode_if(x, bias, bias / 1.1);
  const std::string text = spike_train_to_text(tr, SchemeTag::kIntegrateFire, spec);
  const SpikeTrain back = spike_train_from_text(text);
  REQUIRE(back.times.size() == tr.times.size());
  REQUIRE(back.samples.size() == tr.samples.size());
  for (size_t i = 0; i < tr.times.size(); ++i) CHECK(back.times[i] == tr.times[i]);
  for (size_t i = 0; i < tr.samples.size(); ++i) CHECK(back.samples[i] == tr.samples[i]);
  CHECK_THROWS_AS(spike_train_from_text(""), std::invalid_argument);
}
