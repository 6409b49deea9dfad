#include "qpt/normalform.hpp"

#include <algorithm>
#include <limits>

#include "qpt/errors.hpp"

namespace qpt {

namespace {

bool denominator_cancels(const HamiltonianFamily& F) {
  return F.map.kind == MapVariant::constant &&
         (F.variant == ScheduleVariant::v || F.variant == ScheduleVariant::vi ||
          F.variant == ScheduleVariant::vii);
}

Real checked_b(const HamiltonianFamily& F, int j, const Real& s) {
  Real b = F.b(j, s);
  if (F.map.kind == MapVariant::constant) {
    if (F.pair(j).inner0.is_zero())
      throw resonance_error("phi_over_b: exactly resonant pair j=" +
                            std::to_string(j));
  } else if (abs(b) <= F.residual_tol) {
    throw resonance_error("phi_over_b: denominator below tolerance at j=" +
                          std::to_string(j) + " (s near the resonance value)");
  }
  return b;
}

}  // namespace

Real phi_over_b(const HamiltonianFamily& F, int j, const Real& s) {
  if (denominator_cancels(F)) {
    // phi_j = <omega~, k_j> * rest; the denominator cancels exactly.
    Real nk = sup_norm(F.pair(j).k);
    switch (F.variant) {
      case ScheduleVariant::v:
        return pow(s, j) * exp(nk * s);
      case ScheduleVariant::vi:
        return pow(s, j) * pow(nk, -Real(F.l + 1)) / (Real(j) * j);
      case ScheduleVariant::vii:
        return pow(s, j) * exp(nk * s * s);
      default:
        break;
    }
  }
  Real b = checked_b(F, j, s);
  return F.phi(j, s) / b;
}

Real dphi_over_b(const HamiltonianFamily& F, int j, const Real& s) {
  if (denominator_cancels(F)) {
    Real nk = sup_norm(F.pair(j).k);
    Real sj1 = pow(s, j - 1);
    switch (F.variant) {
      case ScheduleVariant::v:
        return exp(nk * s) * (Real(j) * sj1 + nk * sj1 * s);
      case ScheduleVariant::vi:
        return Real(j) * sj1 * pow(nk, -Real(F.l + 1)) / (Real(j) * j);
      case ScheduleVariant::vii:
        return exp(nk * s * s) * (Real(j) * sj1 + 2 * nk * sj1 * s * s);
      default:
        break;
    }
  }
  Real b = checked_b(F, j, s);
  if (F.map.kind == MapVariant::constant) return F.dphi(j, s) / b;
  Real db = F.db(j, s);
  return F.dphi(j, s) / b - F.phi(j, s) * db / (b * b);
}

namespace {

// Correction terms shared by forward/inverse: depend only on (theta~, s).
struct Corrections {
  std::vector<Real> dr;   // added to r~ (d-1 components)
  Real dtheta_d{0};
};

Corrections corrections(const HamiltonianFamily& F, int n,
                        const PhaseState& z) {
  const int d = F.d();
  const Real& s = z.r[d - 1];
  std::vector<Real> tt(z.theta.begin(), z.theta.end() - 1);
  Corrections c;
  c.dr.assign(d - 1, Real(0));
  CompensatedSum td;
  for (int j = 2; j <= n; ++j) {
    const auto& k = F.pair(j).k;
    Real a = mod1(dot(k, tt));
    Real ratio = phi_over_b(F, j, s);
    Real sn = sin(2 * pi() * a), cs = cos(2 * pi() * a);
    for (int i = 0; i + 1 < d; ++i)
      if (k[i] != 0) c.dr[i] += Real(k[i]) * ratio * sn;
    td.add(dphi_over_b(F, j, s) * cs);
  }
  c.dtheta_d = td.value() / (2 * pi());
  return c;
}

}  // namespace

PhaseState CanonicalMap::forward(const PhaseState& z) const {
  const HamiltonianFamily& F = *fam;
  if (n > F.n()) throw error("CanonicalMap: order exceeds built pairs");
  PhaseState out = z;
  if (n <= 1) return out;
  Corrections c = corrections(F, n, z);
  const int d = F.d();
  for (int i = 0; i + 1 < d; ++i) out.r[i] += c.dr[i];
  out.theta[d - 1] = mod1(out.theta[d - 1] + c.dtheta_d);
  return out;
}

PhaseState CanonicalMap::inverse(const PhaseState& z) const {
  const HamiltonianFamily& F = *fam;
  if (n > F.n()) throw error("CanonicalMap: order exceeds built pairs");
  PhaseState out = z;
  if (n <= 1) return out;
  Corrections c = corrections(F, n, z);
  const int d = F.d();
  for (int i = 0; i + 1 < d; ++i) out.r[i] -= c.dr[i];
  out.theta[d - 1] = mod1(out.theta[d - 1] - c.dtheta_d);
  return out;
}

ConjugacyReport verify_conjugacy(const HamiltonianFamily& F, int n,
                                 const std::vector<PhaseState>& points,
                                 const Real& tol) {
  HamiltonianFamily Fn = F;
  Fn.pairs.resize(std::min<std::size_t>(Fn.pairs.size(), n >= 2 ? n - 1 : 0));
  CanonicalMap psi{&Fn, n};
  ConjugacyReport rep;
  for (const auto& z : points) {
    try {
      PhaseState Z = psi.inverse(z);
      const int d = F.d();
      std::vector<Real> w = F.map.eval(Z.r[d - 1]);
      CompensatedSum h0;
      for (int i = 0; i < d; ++i) h0.add(w[i] * Z.r[i]);
      Real res = abs(eval_H(Fn, z) - h0.value());
      ++rep.checked;
      if (res > rep.max_residual) {
        rep.max_residual = res;
        rep.worst = z;
      }
    } catch (const resonance_error& e) {
      rep.point_errors.push_back(e.what());
    }
  }
  rep.pass = rep.checked > 0 && rep.max_residual <= tol;
  return rep;
}

Real TrigPolynomial::eval(const std::vector<Real>& theta_tilde) const {
  CompensatedSum acc;
  for (const auto& t : terms) {
    Real a = mod1(dot(t.k, theta_tilde));
    acc.add(t.coeff.to_real() * cos(2 * pi() * a));
  }
  return acc.value();
}

std::vector<Real> TrigPolynomial::grad(const std::vector<Real>& theta_tilde) const {
  std::vector<Real> g(theta_tilde.size(), Real(0));
  for (const auto& t : terms) {
    Real a = mod1(dot(t.k, theta_tilde));
    Real amp = -2 * pi() * t.coeff.to_real() * sin(2 * pi() * a);
    for (std::size_t i = 0; i < t.k.size(); ++i)
      if (t.k[i] != 0) g[i] += amp * Real(t.k[i]);
  }
  return g;
}

namespace {

// Truncated power series in s, coeffs[p] = coefficient of s^p.
using Series = std::vector<Real>;

Series series_inverse(const Series& b, int P) {
  if (b.empty() || b[0] == 0)
    throw resonance_error("bnf: denominator vanishes at s = 0");
  Series inv(P + 1, Real(0));
  inv[0] = 1 / b[0];
  for (int p = 1; p <= P; ++p) {
    CompensatedSum acc;
    for (int q = 1; q <= p && q < static_cast<int>(b.size()); ++q)
      acc.add(b[q] * inv[p - q]);
    inv[p] = -acc.value() / b[0];
  }
  return inv;
}

Series series_mul(const Series& a, const Series& b, int P) {
  Series out(P + 1, Real(0));
  for (int p = 0; p <= P; ++p) {
    CompensatedSum acc;
    for (int q = 0; q <= p; ++q) {
      if (q < static_cast<int>(a.size()) && p - q < static_cast<int>(b.size()))
        acc.add(a[q] * b[p - q]);
    }
    out[p] = acc.value();
  }
  return out;
}

// Power series of phi_j(s) / b_j(s) up to order P.  For the cancelling
// schedules the <omega~,k_j> factor is removed symbolically on both sides.
Series ratio_series(const HamiltonianFamily& F, int j, int P) {
  const ResonancePair& pr = F.pair(j);
  Real nk = sup_norm(pr.k);
  Series num(P + 1, Real(0));
  switch (F.variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      if (j <= P) num[j] = exp(-Real(j) * nk);
      break;
    case ScheduleVariant::ii:
      if (j <= P) num[j] = exp(-(F.C / 2) * nk);
      break;
    case ScheduleVariant::iv:
      throw variant_error("bnf: schedule iv has no power-series normal form");
    case ScheduleVariant::v: {
      Real f{1};
      for (int l = 0; j + l <= P; ++l) {
        num[j + l] = pow(nk, l) / f;
        f *= l + 1;
      }
      break;
    }
    case ScheduleVariant::vi:
      if (j <= P) num[j] = pow(nk, -Real(F.l + 1)) / (Real(j) * j);
      break;
    case ScheduleVariant::vii: {
      Real f{1};
      for (int l = 0; j + 2 * l <= P; ++l) {
        num[j + 2 * l] = pow(nk, l) / f;
        f *= l + 1;
      }
      break;
    }
  }
  if (denominator_cancels(F)) return num;  // factor already divided out
  // Denominator series b_j(s) = b_j(0) + s-dependent shift.
  Series den(P + 1, Real(0));
  if (pr.inner0.is_zero())
    throw resonance_error("bnf: exactly resonant pair j=" + std::to_string(j));
  den[0] = pr.inner0.to_real();
  switch (F.map.kind) {
    case MapVariant::constant:
      break;
    case MapVariant::hat:
      if (P >= 1) den[1] = Real(pr.k[0]);
      break;
    case MapVariant::bar:
      for (std::size_t i = 0; i < pr.k.size() && static_cast<int>(i) + 1 <= P; ++i)
        den[i + 1] = Real(pr.k[i]);
      break;
  }
  return series_mul(num, series_inverse(den, P), P);
}

}  // namespace

TrigPolynomial bnf_coefficient(const HamiltonianFamily& F, int p) {
  if (p < 2) throw error("bnf_coefficient: p >= 2 required");
  if (F.variant == ScheduleVariant::iv)
    throw variant_error("bnf_coefficient: schedule iv unsupported");
  TrigPolynomial T;
  Real inv2pi = 1 / (2 * pi());
  for (int j = 2; j <= F.n(); ++j) {
    Series rs = ratio_series(F, j, p);
    if (rs[p] == 0) continue;
    T.terms.push_back({F.pair(j).k, LogAmplitude::from_real(rs[p] * inv2pi)});
  }
  return T;
}

Real bnf_remainder_order(const HamiltonianFamily& F, int n, int P) {
  if (P < 2) throw error("bnf_remainder_order: P >= 2 required");
  if (F.variant == ScheduleVariant::iv)
    throw variant_error("bnf_remainder_order: schedule iv unsupported");
  HamiltonianFamily Fn = F;
  Fn.pairs.resize(std::min<std::size_t>(Fn.pairs.size(), n >= 2 ? n - 1 : 0));
  const int d = Fn.d();
  std::vector<TrigPolynomial> T(P + 1);
  for (int p = 2; p <= P; ++p) T[p] = bnf_coefficient(Fn, p);

  // Generic probe angles; r~ drops out of the residual.
  std::vector<Real> tt(d - 1);
  for (int i = 0; i + 1 < d; ++i) tt[i] = Real("0.1234567891") + Real(i) / 7;

  std::vector<Real> ls, lr;
  for (int e = 2; e <= 5; ++e) {
    Real s = pow(Real(10), -e);
    // r + grad f_P with f_P = -sum s^p T_p.
    PhaseState z;
    z.theta = tt;
    z.theta.push_back(Real("0.37"));
    z.r.assign(d, Real(0));
    z.r[d - 1] = s;
    Real sp = s * s;
    std::vector<Real> g(d - 1, Real(0));
    for (int p = 2; p <= P; ++p) {
      std::vector<Real> gp = T[p].grad(tt);
      for (int i = 0; i + 1 < d; ++i) g[i] -= sp * gp[i];
      sp *= s;
    }
    for (int i = 0; i + 1 < d; ++i) z.r[i] += g[i];
    std::vector<Real> w = Fn.map.eval(s);
    CompensatedSum h0;
    for (int i = 0; i < d; ++i) h0.add(w[i] * z.r[i]);
    Real res = abs(eval_H(Fn, z) - h0.value());
    if (res == 0) return std::numeric_limits<Real>::infinity();
    ls.push_back(log(s));
    lr.push_back(log(res));
  }
  // Least-squares slope of log res against log s.
  Real ms{0}, mr{0};
  for (std::size_t i = 0; i < ls.size(); ++i) {
    ms += ls[i];
    mr += lr[i];
  }
  ms /= static_cast<int>(ls.size());
  mr /= static_cast<int>(ls.size());
  Real num{0}, den{0};
  for (std::size_t i = 0; i < ls.size(); ++i) {
    num += (ls[i] - ms) * (lr[i] - mr);
    den += (ls[i] - ms) * (ls[i] - ms);
  }
  return num / den;
}

std::vector<ProbeValue> regularity_probe(const HamiltonianFamily& F, int m,
                                         const PhaseState& probe, int n_lo,
                                         int n_hi, int dir, int comp) {
  if (F.variant != ScheduleVariant::vi)
    throw variant_error("regularity_probe: schedule vi expected");
  if (m < 0 || m > F.l + 2) throw error("regularity_probe: require 0 <= m <= l+2");
  const int d = F.d();
  if (dir < 0 || dir >= d - 1 || comp < 0 || comp >= d - 1)
    throw error("regularity_probe: direction/component out of range");
  if (probe.r[d - 1] == 0)
    throw error("regularity_probe: probe requires s != 0");
  if (n_lo < 1 || n_hi < n_lo) throw error("regularity_probe: bad n range");
  if (n_hi > F.n()) throw error("regularity_probe: n range exceeds built pairs");

  // Binomial weights of the order-m central difference.
  std::vector<Real> wgt(m + 1);
  wgt[0] = 1;
  for (int i = 1; i <= m; ++i) wgt[i] = wgt[i - 1] * (m - i + 1) / i;
  for (int i = 1; i <= m; i += 2) wgt[i] = -wgt[i];

  auto value = [&](int n, const Real& x) {
    PhaseState z = probe;
    z.theta[dir] = mod1(z.theta[dir] + x);
    CanonicalMap psi{&F, n};
    return psi.forward(z).r[comp];
  };

  Real eps = pow(Real(2), -static_cast<int>(precision_bits()));
  Real h0 = pow(eps, Real(1) / (m + 2));
  if (h0 == 0) throw precision_error("regularity_probe: step underflow");

  std::vector<ProbeValue> out;
  for (int n = n_lo; n <= n_hi; ++n) {
    if (m == 0) {
      out.push_back({n, value(n, Real(0)), Real(0)});
      continue;
    }
    auto diff = [&](const Real& h) {
      CompensatedSum acc;
      for (int i = 0; i <= m; ++i)
        acc.add(wgt[i] * value(n, (Real(m) / 2 - i) * h));
      return Real(acc.value() / pow(h, m));
    };
    Real Dh = diff(h0), Dh2 = diff(h0 / 2);
    out.push_back({n, Dh2, abs(Dh2 - Dh) / 3});
  }
  return out;
}

}  // namespace qpt
