// Unit tests of the aperiodic sinc lookup-table path: psi, the second
// antiderivative f, cubic table interpolation, 4-lookup Gram entries.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <numbers>
#include <random>

#include "recon/sinc_table.hpp"

using namespace recon;

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double t) {
  if (std::abs(t) < 1e-12) return 1.0;
  return std::sin(kPi * t) / (kPi * t);
}

struct Quad {
  gsl_integration_workspace* ws;
  gsl_error_handler_t* old_handler;
  Quad() : ws(gsl_integration_workspace_alloc(4000)),
           old_handler(gsl_set_error_handler_off()) {}
  ~Quad() {
    gsl_integration_workspace_free(ws);
    gsl_set_error_handler(old_handler);
  }
  double integrate(double (*fn)(double, void*), void* params, double a, double b) {
    gsl_function f;
    f.function = fn;
    f.params = params;
    double out = 0, err = 0;
    gsl_integration_qag(&f, a, b, 1e-12, 1e-12, 4000, GSL_INTEG_GAUSS61, ws,
                        &out, &err);
    return out;
  }
};

double sinc_cb(double t, void*) { return sinc(t); }
double psi_cb(double t, void*) { return psi(t); }

struct ShiftParams {
  double a2, b2;
};
double psi_diff_cb(double t, void* p) {
  const auto* q = static_cast<const ShiftParams*>(p);
  return psi(t - q->a2) - psi(t - q->b2);
}

}  // namespace

TEST_CASE("psi") {
  Quad quad;

  SUBCASE("odd with psi(0) = 0") {
    CHECK(psi(0.0) == 0.0);
    for (double t : {0.1, 0.5, 1.7, 9.3, 33.0}) {
      CHECK(psi(-t) == doctest::Approx(-psi(t)).epsilon(1e-14));
    }
  }

  SUBCASE("matches adaptive quadrature of sinc") {
    for (double t : {0.25, 1.0, 2.5, 7.0, 19.5}) {
      const double oracle = quad.integrate(&sinc_cb, nullptr, 0.0, t);
      CHECK(std::abs(psi(t) - oracle) <= 1e-12);
    }
  }

  SUBCASE("approaches 1/2 in the tail") {
    CHECK(std::abs(psi(40.0) - 0.5) <= 1e-2);
    CHECK(std::abs(psi(400.0) - 0.5) <= 1e-3);
  }
}

TEST_CASE("f closed form") {
  Quad quad;

  SUBCASE("f(0) = 0 and the small-argument parabola") {
    CHECK(f_closed(0.0) == 0.0);
    for (double t : {0.01, 0.03, 0.05}) {
      CHECK(f_closed(t) == doctest::Approx(t * t / 2.0).epsilon(1e-3));
    }
  }

  SUBCASE("even symmetry, locked against the quadrature oracle") {
    // f(t) = int_0^t psi; evenness follows from psi being odd, and the
    // closed form must agree with the direct integral on both sides
    for (double t : {0.3, 1.1, 4.7, 12.0}) {
      const double direct_pos = quad.integrate(&psi_cb, nullptr, 0.0, t);
      const double direct_neg = quad.integrate(&psi_cb, nullptr, 0.0, -t);
      CHECK(std::abs(f_closed(t) - direct_pos) <= 1e-10);
      CHECK(std::abs(f_closed(-t) - direct_neg) <= 1e-10);
      CHECK(f_closed(-t) == doctest::Approx(f_closed(t)).epsilon(1e-13));
    }
  }

  SUBCASE("second derivative recovers sinc") {
    const double h = 1e-4;
    for (double t = 0.1; t <= 20.0; t += 0.37) {
      const double second =
          (f_closed(t + h) - 2.0 * f_closed(t) + f_closed(t - h)) / (h * h);
      CHECK(std::abs(second - sinc(t)) <= 1e-4);
    }
  }
}

TEST_CASE("lookup table") {
  const LookupTable table(30.0);

  SUBCASE("construction validates the step bound") {
    CHECK_THROWS_AS(LookupTable(10.0, 0.1), std::invalid_argument);
    CHECK_NOTHROW(LookupTable(10.0, 1.0 / 128));
  }

  SUBCASE("interpolation error at 1000 random points, both signs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> td(-29.9, 29.9);
    double max_err = 0;
    for (int i = 0; i < 1000; ++i) {
      const double t = td(rng);
      max_err = std::max(max_err, std::abs(table.f_eval(t) - f_closed(t)));
    }
    CHECK(max_err <= 1e-8);
  }

  SUBCASE("out-of-range arguments throw") {
    CHECK_THROWS_AS(table.f_eval(30.5), std::out_of_range);
    CHECK_THROWS_AS(table.f_eval(-31.0), std::out_of_range);
    CHECK_NOTHROW(table.f_eval(30.0));
  }

  SUBCASE("text round-trip") {
    const LookupTable small(4.0);
    const LookupTable back = ftable_from_text(ftable_to_text(small));
    CHECK(back.t_max() == small.t_max());
    CHECK(back.step() == small.step());
    REQUIRE(back.size() == small.size());
    for (size_t i = 0; i < small.size(); ++i) {
      CHECK(back.values()[i] == small.values()[i]);
    }
  }
}

TEST_CASE("gram_entry_f") {
  const LookupTable table(64.0);
  Quad quad;

  auto oracle = [&](double a1, double b1, double a2, double b2) {
    ShiftParams p{a2, b2};
    return quad.integrate(&psi_diff_cb, &p, a1, b1);
  };

  SUBCASE("identical and overlapping intervals against quadrature") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(0.0, 20.0), len(0.2, 1.5);
    for (int i = 0; i < 200; ++i) {
      const double a1 = pos(rng), b1 = a1 + len(rng);
      const double a2 = pos(rng), b2 = a2 + len(rng);
      const double entry = gram_entry_f(b1, a1, b2, a2, table);
      CHECK(std::abs(entry - oracle(a1, b1, a2, b2)) <= 1e-6);
      // same interval on both sides
      const double diag = gram_entry_f(b1, a1, b1, a1, table);
      CHECK(std::abs(diag - oracle(a1, b1, a1, b1)) <= 1e-6);
      CHECK(diag > 0.0);
    }
  }

  SUBCASE("argument swap symmetry") {
    const double e1 = gram_entry_f(5.7, 4.9, 12.1, 11.0, table);
    const double e2 = gram_entry_f(12.1, 11.0, 5.7, 4.9, table);
    CHECK(e1 == doctest::Approx(e2).epsilon(1e-12));
  }

  SUBCASE("far-separated intervals decay toward zero") {
    const double near = gram_entry_f(1.0, 0.0, 1.5, 0.5, table);
    const double far = gram_entry_f(1.0, 0.0, 31.0, 30.0, table);
    CHECK(std::abs(far) <= 0.05);
    CHECK(std::abs(far) < std::abs(near));
  }

  SUBCASE("operation-count contract: exactly 4 lookups per entry") {
    table.reset_lookup_count();
    (void)gram_entry_f(2.0, 1.0, 5.0, 4.0, table);
    CHECK(table.lookup_count() == 4);
    (void)gram_entry_f(2.0, 1.0, 5.0, 4.0, table);
    (void)gram_entry_f(7.0, 6.5, 5.0, 4.0, table);
    CHECK(table.lookup_count() == 12);
  }

  SUBCASE("range errors propagate") {
    const LookupTable tiny(2.0);
    CHECK_THROWS_AS(gram_entry_f(10.0, 9.0, 1.0, 0.5, tiny), std::out_of_range);
  }
}
