#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "isq/bessel.hpp"
#include "isq/error.hpp"

using namespace isq;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
} // namespace

TEST_CASE("reciprocal gamma series matches tgamma") {
  for (double mu : {-0.5, -0.3, -1e-4, 0.0, 1e-6, 0.2, 0.4, 0.5})
    CHECK(rel(reciprocal_gamma1p(mu), 1.0 / std::tgamma(1.0 + mu)) < 1e-14);
}

TEST_CASE("half-integer orders reduce to elementary functions") {
  for (double x : {1e-3, 0.1, 1.0, 1.9, 2.1, 7.5, 40.0, 300.0}) {
    const auto b = bessel_ik_scaled(0.5, x);
    // I_{1/2} = sqrt(2/(pi x)) sinh x,  K_{1/2} = sqrt(pi/(2x)) e^{-x}
    const double i_exact = std::sqrt(2.0 / (std::numbers::pi * x)) * 0.5 * (1.0 - std::exp(-2.0 * x));
    const double k_exact = std::sqrt(std::numbers::pi / (2.0 * x));
    CHECK(rel(b.i, i_exact) < 1e-12);
    CHECK(rel(b.k, k_exact) < 1e-12);
    const auto b3 = bessel_ik_scaled(1.5, x);
    // K_{3/2} = sqrt(pi/(2x)) e^{-x} (1 + 1/x)
    CHECK(rel(b3.k, k_exact * (1.0 + 1.0 / x)) < 1e-12);
  }
}

TEST_CASE("irrational orders agree with an independent implementation") {
  const double orders[] = {0.0, std::sqrt(2.0), std::sqrt(6.0), std::sqrt(12.0), 3.7, 10.5,
                           std::sqrt(32.0 * 33.0), 40.0};
  const double args[] = {1e-3, 0.05, 0.5, 1.0, 1.999, 2.0, 5.0, 25.0, 100.0, 650.0};
  for (double nu : orders)
    for (double x : args) {
      CAPTURE(nu);
      CAPTURE(x);
      const auto b = bessel_ik_scaled(nu, x);
      const double ref_i = boost::math::cyl_bessel_i(nu, x) * std::exp(-x);
      const double ref_k = boost::math::cyl_bessel_k(nu, x) * std::exp(x);
      if (ref_i > 1e-290) CHECK(rel(b.i, ref_i) < 1e-10);
      if (std::isfinite(ref_k)) CHECK(rel(b.k, ref_k) < 1e-10);
    }
}

TEST_CASE("Wronskian I K' - I' K = -1/x") {
  for (double nu : {0.3, std::sqrt(2.0), 6.5, 25.0})
    for (double x : {0.01, 1.0, 3.0, 50.0, 900.0}) {
      const auto b = bessel_ik_scaled(nu, x);
      CHECK(rel(b.i * b.kp - b.ip * b.k, -1.0 / x) < 1e-11);
    }
}

TEST_CASE("large arguments stay finite in scaled form") {
  const auto b = bessel_ik_scaled(std::sqrt(2.0), 5000.0);
  CHECK(std::isfinite(b.i));
  CHECK(std::isfinite(b.k));
  // Leading asymptotics: I e^{-x} ~ 1/sqrt(2 pi x), K e^{x} ~ sqrt(pi/(2x)).
  CHECK(rel(b.i, 1.0 / std::sqrt(2.0 * std::numbers::pi * 5000.0)) < 1e-3);
  CHECK(rel(b.k, std::sqrt(std::numbers::pi / 1e4)) < 1e-3);
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(bessel_ik_scaled(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(bessel_ik_scaled(-1.0, 1.0), DomainError);
}

TEST_CASE("log-domain values cover high orders") {
  for (double nu : {41.0, 57.3, 120.0, 400.0})
    for (double x : {0.5, 3.0, 30.0, 90.0, 300.0}) {
      auto guarded = [](auto fn) {
        try {
          return fn();
        } catch (const std::overflow_error &) {
          return std::numeric_limits<double>::infinity();
        }
      };
      const double ref_i = guarded([&] { return boost::math::cyl_bessel_i(nu, x); });
      const double ref_k = guarded([&] { return boost::math::cyl_bessel_k(nu, x); });
      const auto lb = log_bessel_ik(nu, x);
      if (ref_i > 1e-300 && std::isfinite(ref_i)) CHECK(std::abs(lb.log_i - std::log(ref_i)) < 1e-9);
      if (ref_k > 1e-300 && std::isfinite(ref_k)) CHECK(std::abs(lb.log_k - std::log(ref_k)) < 1e-9);
    }
  // Below order 40 the log values come from the direct evaluation.
  const auto lb = log_bessel_ik(std::sqrt(2.0), 1.7);
  CHECK(std::exp(lb.log_i) == doctest::Approx(boost::math::cyl_bessel_i(std::sqrt(2.0), 1.7)).epsilon(1e-12));
  // Product stays finite where the factors do not.
  const auto far = log_bessel_ik(600.0, 1e-3);
  CHECK(std::isfinite(far.log_i + far.log_k));
  CHECK(far.log_i + far.log_k == doctest::Approx(-std::log(1200.0)).epsilon(1e-6));
}

TEST_CASE("tiny arguments keep full relative accuracy") {
  for (double nu : {0.5, 1.5, std::sqrt(2.0), 3.5, 6.5})
    for (double x : {1e-6, 1e-9, 1e-12, 1e-15}) {
      const double leading = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
      CHECK(bessel_i(nu, x) == doctest::Approx(leading).epsilon(1e-13));
    }
}
