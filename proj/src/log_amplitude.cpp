#include "qpt/log_amplitude.hpp"

namespace qpt {

LogAmplitude log_sin_2pi(const LogAmplitude& x) {
  if (x.sign == 0) return LogAmplitude::zero();
  // |2 pi x| small: sin(2 pi x) = 2 pi x * (1 - (2 pi x)^2/6 + ...).
  Real l2pix = x.log_mag + log(2 * pi());
  // Truncation error relative size ~ (2 pi x)^2; below one ulp when
  // 2*l2pix < -prec*ln2.
  if (l2pix < Real(-0.5) * precision_bits() * log(Real(2))) {
    return LogAmplitude::from_log(x.sign, l2pix);
  }
  if (l2pix > log(Real("1e30")))
    throw precision_error("log_sin_2pi: argument too large for direct evaluation");
  // Direct evaluation (argument reduced mod 1 at extended precision).
  Real xr = x.to_real();
  Real frac = mod1_fma(xr, Real(1), Real(0));
  return LogAmplitude::from_real(sin(2 * pi() * frac));
}

}  // namespace qpt
