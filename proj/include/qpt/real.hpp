#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <vector>

#include "qpt/errors.hpp"

namespace qpt {

// Variable-precision real; working precision is configured once per process
// (default 256 bits) and may be raised locally via precision_guard.
using Real = boost::multiprecision::mpfr_float;
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

// Configure the working precision (in bits) for all subsequently created
// Real values on this thread.
void set_precision_bits(unsigned bits);
unsigned precision_bits();

inline unsigned bits_to_digits10(unsigned bits) {
  // digits10 >= bits * log10(2); +2 guard digits
  return static_cast<unsigned>(bits * 0.3010299956639812) + 2;
}

// RAII: raise the thread default precision, restore on scope exit.
class precision_guard {
 public:
  explicit precision_guard(unsigned bits);
  ~precision_guard();
  precision_guard(const precision_guard&) = delete;
  precision_guard& operator=(const precision_guard&) = delete;

 private:
  unsigned saved_digits_;
};

Real pi();

// x - floor(x) in [0,1).
Real mod1(const Real& x);

// frac(a*b + c) computed with enough extra precision that the result is
// accurate to the working precision even when |a*b| is astronomically larger
// than 1.  Raises capacity_error if the needed precision is absurd.
Real mod1_fma(const Real& a, const Real& b, const Real& c);

// Parse a decimal string at working precision.
Real real_from_string(const std::string& s);

// Serialize with enough digits to round-trip at working precision.
std::string real_to_string(const Real& x);

// Compensated (Kahan-Babuska-Neumaier) accumulator.  Working precision is
// already high; this guards the few places where sums mix wildly different
// magnitudes after exponentiation.
class CompensatedSum {
 public:
  void add(const Real& x) {
    Real t = sum_ + x;
    if (abs(sum_) >= abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_{0};
  Real comp_{0};
};

// Sup norm of a vector of Reals.
Real sup_norm(const std::vector<Real>& v);

// Sup norm of an integer vector, as Real.
Real sup_norm(const std::vector<Integer>& k);

// <a, b> with compensation; sizes must match.
Real dot(const std::vector<Real>& a, const std::vector<Real>& b);

// <k, x> for integer k.
Real dot(const std::vector<Integer>& k, const std::vector<Real>& x);

}  // namespace qpt
