#include "qpt/real.hpp"

#include <cmath>
#include <sstream>

namespace qpt {

namespace {
unsigned g_bits = 256;
}

void set_precision_bits(unsigned bits) {
  if (bits < 24) throw precision_error("working precision below 24 bits");
  if (bits > (1u << 24)) throw capacity_error("working precision above 2^24 bits");
  g_bits = bits;
  Real::default_precision(bits_to_digits10(bits));
}

unsigned precision_bits() { return g_bits; }

precision_guard::precision_guard(unsigned bits)
    : saved_digits_(Real::default_precision()) {
  if (bits > (1u << 26)) throw capacity_error("requested precision above 2^26 bits");
  Real::default_precision(bits_to_digits10(bits));
}

precision_guard::~precision_guard() { Real::default_precision(saved_digits_); }

Real pi() { return boost::math::constants::pi<Real>(); }

Real mod1(const Real& x) {
  Real f = x - floor(x);
  // guard against f == 1 after rounding
  if (f >= 1) f -= 1;
  if (f < 0) f += 1;
  return f;
}

Real mod1_fma(const Real& a, const Real& b, const Real& c) {
  // Magnitude estimate of the product decides how many extra bits the
  // fractional part needs.
  double la = 0, lb = 0, lc = 0;
  if (a != 0) la = static_cast<double>(log2(abs(a)));
  if (b != 0) lb = static_cast<double>(log2(abs(b)));
  if (c != 0) lc = static_cast<double>(log2(abs(c)));
  double lead = std::max(la + lb, lc);
  if (lead < 0) lead = 0;
  if (lead > 6.0e7)
    throw capacity_error("mod1_fma: phase exponent too large to reduce");
  unsigned need = precision_bits() + static_cast<unsigned>(lead) + 64;
  unsigned out_digits = Real::default_precision();
  precision_guard guard(need);
  Real p{0};
  p.precision(bits_to_digits10(need));
  p = a;
  p *= b;
  p += c;
  Real f = mod1(p);
  return Real(f, out_digits);  // round back to working precision
}

Real real_from_string(const std::string& s) { return Real(s); }

std::string real_to_string(const Real& x) {
  std::ostringstream os;
  os.precision(Real::default_precision());
  os << x;
  return os.str();
}

Real sup_norm(const std::vector<Real>& v) {
  Real m{0};
  for (const auto& x : v) m = (std::max)(m, Real(abs(x)));
  return m;
}

Real sup_norm(const std::vector<Integer>& k) {
  Integer m{0};
  for (const auto& x : k) m = (std::max)(m, Integer(abs(x)));
  return Real(m);
}

Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  CompensatedSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * b[i]);
  return s.value();
}

Real dot(const std::vector<Integer>& k, const std::vector<Real>& x) {
  CompensatedSum s;
  for (std::size_t i = 0; i < k.size(); ++i) s.add(Real(k[i]) * x[i]);
  return s.value();
}

}  // namespace qpt
