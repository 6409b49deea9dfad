// Precision plumbing: Real helpers, compensated sums, the signed log-domain
// scalar, and the counter RNG.

#include <doctest.h>

#include "qpt/log_amplitude.hpp"
#include "qpt/real.hpp"
#include "qpt/rng.hpp"

using namespace qpt;

TEST_CASE("mod1 basics") {
  CHECK(mod1(Real("2.25")) == Real("0.25"));
  CHECK(mod1(Real("-0.25")) == Real("0.75"));
  CHECK(mod1(Real(3)) == 0);
}

TEST_CASE("mod1_fma matches exact rational arithmetic at huge magnitudes") {
  // Dyadic inputs are exactly representable, so the rational computation is
  // an exact oracle.
  Rational ra = Rational(Integer(1) << 200, 8) + Rational(3, 4);
  Rational rb = Rational(5, 2);
  Rational rc = Rational(7, 16);
  Real a(ra), b(rb), c(rc);
  Rational prod = ra * rb + rc;
  Rational frac = prod - (numerator(prod) / denominator(prod));
  if (frac < 0) frac += 1;
  CHECK(abs(mod1_fma(a, b, c) - Real(frac)) < pow(Real(2), -240));
}

TEST_CASE("mod1_fma output precision matches the working default") {
  Real x = mod1_fma(Real("1e30"), pi(), Real("0.125"));
  CHECK(x >= 0);
  CHECK(x < 1);
  CHECK(Real::default_precision() ==
        bits_to_digits10(precision_bits()));
}

TEST_CASE("CompensatedSum keeps a unit against 2^300") {
  Real big = pow(Real(2), 300);
  CompensatedSum s;
  s.add(big);
  s.add(Real(1));
  s.add(-big);
  CHECK(s.value() == 1);
}

TEST_CASE("LogAmplitude round trips and algebra") {
  LogAmplitude a = LogAmplitude::from_real(Real("-3.5"));
  CHECK(a.sign == -1);
  CHECK(abs(a.to_real() + Real("3.5")) < Real("1e-70"));

  LogAmplitude b = LogAmplitude::from_real(Real("2"));
  CHECK(abs((a * b).to_real() + 7) < Real("1e-70"));
  CHECK(abs((a / b).to_real() + Real("1.75")) < Real("1e-70"));
  CHECK(abs(a.pow_int(2).to_real() - Real("12.25")) < Real("1e-69"));
  CHECK(a.pow_int(3).sign == -1);

  // signed addition, including exact cancellation
  CHECK(abs((a + b).to_real() + Real("1.5")) < Real("1e-70"));
  CHECK((a - a).is_zero());
  CHECK((LogAmplitude::zero() + b).to_real() == 2);
  CHECK(a.abs_less(LogAmplitude::from_real(Real(4))));
  CHECK(!a.abs_less(b));
}

TEST_CASE("LogAmplitude addition at scales no double could hold") {
  LogAmplitude huge = LogAmplitude::from_log(+1, Real("1e9"));
  LogAmplitude tiny = LogAmplitude::from_log(+1, Real("-1e9"));
  LogAmplitude sum = huge + tiny;
  CHECK(sum.sign == 1);
  CHECK(sum.log_mag == Real("1e9"));  // tiny is below one ulp of huge
  LogAmplitude diff = huge - huge;
  CHECK(diff.is_zero());
}

TEST_CASE("log_sin_2pi agrees with direct evaluation at moderate arguments") {
  Real x("0.1");
  LogAmplitude lx = LogAmplitude::from_real(x);
  CHECK(abs(log_sin_2pi(lx).to_real() - sin(2 * pi() * x)) < Real("1e-70"));
}

TEST_CASE("log_sin_2pi linearizes for exponentially small arguments") {
  // sin(2 pi x) ~ 2 pi x when x = e^{-10^6}
  LogAmplitude lx = LogAmplitude::from_log(+1, Real(-1000000));
  LogAmplitude ls = log_sin_2pi(lx);
  CHECK(ls.sign == 1);
  CHECK(abs(ls.log_mag - (Real(-1000000) + log(2 * pi()))) < Real("1e-60"));
}

TEST_CASE("precision_guard restores the previous working precision") {
  unsigned before = Real::default_precision();
  {
    precision_guard g(1024);
    CHECK(Real::default_precision() > before);
  }
  CHECK(Real::default_precision() == before);
}

TEST_CASE("sup_norm and dot") {
  std::vector<Real> v{Real(-3), Real(2)};
  CHECK(sup_norm(v) == 3);
  std::vector<Integer> k{Integer(-7), Integer(5)};
  CHECK(sup_norm(k) == 7);
  std::vector<Real> x{Real(1), Real(2)};
  CHECK(dot(k, x) == 3);
  CHECK(dot(v, x) == 1);
}

TEST_CASE("CounterRng is deterministic and uniform01 stays in range") {
  CounterRng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    auto x = a.next_u64();
    CHECK(x == b.next_u64());
    Real u = c.uniform01();
    CHECK(u >= 0);
    CHECK(u < 1);
  }
  Real lo(-2), hi(3);
  for (int i = 0; i < 50; ++i) {
    Real u = a.uniform(lo, hi);
    CHECK(u >= lo);
    CHECK(u <= hi);
  }
}
