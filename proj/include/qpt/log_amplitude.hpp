#pragma once

#include "qpt/real.hpp"

namespace qpt {

// Signed log-domain scalar: value = sign * exp(log_mag).  Used wherever
// amplitudes or times can dwarf the floating-point exponent range or where
// reports must stay meaningful at scales like e^{-n^2 ||k_n||}.
struct LogAmplitude {
  int sign = 0;   // -1, 0, +1
  Real log_mag{0};  // ln |value|; ignored when sign == 0

  static LogAmplitude zero() { return {}; }
  static LogAmplitude one() { return {1, Real(0)}; }

  static LogAmplitude from_real(const Real& x) {
    if (x == 0) return zero();
    return {x > 0 ? 1 : -1, Real(log(abs(x)))};
  }
  static LogAmplitude from_log(int sign, const Real& log_mag) {
    if (sign == 0) return zero();
    return {sign > 0 ? 1 : -1, log_mag};
  }

  bool is_zero() const { return sign == 0; }

  // Conversion back to a Real; MPFR's exponent range is wide (~2^62) so this
  // only fails for truly unrepresentable magnitudes.
  Real to_real() const {
    if (sign == 0) return Real(0);
    if (log_mag > Real("3.0e18") || log_mag < Real("-3.0e18"))
      throw capacity_error("LogAmplitude::to_real: exponent out of range");
    Real v = exp(log_mag);
    return sign > 0 ? v : Real(-v);
  }

  friend LogAmplitude operator*(const LogAmplitude& a, const LogAmplitude& b) {
    if (a.sign == 0 || b.sign == 0) return zero();
    return {a.sign * b.sign, a.log_mag + b.log_mag};
  }
  friend LogAmplitude operator/(const LogAmplitude& a, const LogAmplitude& b) {
    if (b.sign == 0) throw error("LogAmplitude: division by zero");
    if (a.sign == 0) return zero();
    return {a.sign * b.sign, a.log_mag - b.log_mag};
  }
  LogAmplitude pow_int(long p) const {
    if (sign == 0) {
      if (p <= 0) throw error("LogAmplitude: 0 to non-positive power");
      return zero();
    }
    int s = (sign < 0 && (p % 2 != 0)) ? -1 : 1;
    return {s, Real(log_mag * p)};
  }
  LogAmplitude operator-() const { return {-sign, log_mag}; }

  // log-sum-exp with signs; exact up to working precision.
  friend LogAmplitude operator+(const LogAmplitude& a, const LogAmplitude& b) {
    if (a.sign == 0) return b;
    if (b.sign == 0) return a;
    const LogAmplitude& big = (a.log_mag >= b.log_mag) ? a : b;
    const LogAmplitude& small = (a.log_mag >= b.log_mag) ? b : a;
    Real d = small.log_mag - big.log_mag;  // <= 0
    Real inner = (small.sign == big.sign) ? Real(1 + exp(d)) : Real(1 - exp(d));
    if (inner == 0) return zero();
    // inner in (0,2]; log1p-style correction
    return {big.sign, Real(big.log_mag + log(inner))};
  }
  friend LogAmplitude operator-(const LogAmplitude& a, const LogAmplitude& b) {
    return a + (-b);
  }

  // |a| < |b|
  bool abs_less(const LogAmplitude& b) const {
    if (sign == 0) return b.sign != 0;
    if (b.sign == 0) return false;
    return log_mag < b.log_mag;
  }
};

// sin(2*pi*x) for a log-domain x, valid (and accurate) when |x| is small
// enough that the Taylor expansion truncation is below working precision;
// falls back to a Real evaluation otherwise.
LogAmplitude log_sin_2pi(const LogAmplitude& x);

}  // namespace qpt
