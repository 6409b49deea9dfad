#include "qpt/hamiltonian.hpp"

#include <algorithm>

namespace qpt {

std::string to_string(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::i: return "i";
    case ScheduleVariant::ii: return "ii";
    case ScheduleVariant::iii: return "iii";
    case ScheduleVariant::iv: return "iv";
    case ScheduleVariant::v: return "v";
    case ScheduleVariant::vi: return "vi";
    case ScheduleVariant::vii: return "vii";
  }
  return "?";
}

ScheduleVariant schedule_from_string(const std::string& s) {
  if (s == "i") return ScheduleVariant::i;
  if (s == "ii") return ScheduleVariant::ii;
  if (s == "iii") return ScheduleVariant::iii;
  if (s == "iv") return ScheduleVariant::iv;
  if (s == "v") return ScheduleVariant::v;
  if (s == "vi") return ScheduleVariant::vi;
  if (s == "vii") return ScheduleVariant::vii;
  throw error("unknown schedule variant: " + s);
}

std::string to_string(MapVariant m) {
  switch (m) {
    case MapVariant::hat: return "hat";
    case MapVariant::bar: return "bar";
    case MapVariant::constant: return "const";
  }
  return "?";
}

MapVariant map_from_string(const std::string& s) {
  if (s == "hat") return MapVariant::hat;
  if (s == "bar") return MapVariant::bar;
  if (s == "const" || s == "constant") return MapVariant::constant;
  throw error("unknown map variant: " + s);
}

std::vector<Real> FrequencyMap::eval(const Real& s) const {
  std::vector<Real> w = omega0;
  const int dd = d();
  switch (kind) {
    case MapVariant::constant:
      break;
    case MapVariant::hat:
      w[0] += s;
      break;
    case MapVariant::bar: {
      Real p = s;
      for (int i = 0; i + 1 < dd; ++i) {  // components 1..d-1 get s^i
        w[i] += p;
        p *= s;
      }
      break;
    }
  }
  return w;
}

std::vector<Real> FrequencyMap::d1(const Real& s) const {
  const int dd = d();
  std::vector<Real> w(dd, Real(0));
  switch (kind) {
    case MapVariant::constant:
      break;
    case MapVariant::hat:
      w[0] = 1;
      break;
    case MapVariant::bar: {
      Real p{1};
      for (int i = 0; i + 1 < dd; ++i) {
        w[i] = (i + 1) * p;
        p *= s;
      }
      break;
    }
  }
  return w;
}

std::vector<Real> FrequencyMap::d2(const Real& s) const {
  const int dd = d();
  std::vector<Real> w(dd, Real(0));
  if (kind == MapVariant::bar) {
    Real p{1};
    for (int i = 1; i + 1 < dd; ++i) {
      w[i] = Real(i + 1) * i * p;
      p *= s;
    }
  }
  return w;
}

Real FrequencyMap::inner_shift(const std::vector<Integer>& k, const Real& s) const {
  switch (kind) {
    case MapVariant::constant:
      return Real(0);
    case MapVariant::hat:
      return Real(k[0]) * s;
    case MapVariant::bar: {
      CompensatedSum acc;
      Real p = s;
      for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] != 0) acc.add(Real(k[i]) * p);
        p *= s;
      }
      return acc.value();
    }
  }
  return Real(0);
}

namespace {
LogAmplitude pow_amp(const Real& s, long e) {
  return LogAmplitude::from_real(s).pow_int(e);
}
}  // namespace

LogAmplitude HamiltonianFamily::phi_log(int j, const Real& s) const {
  const ResonancePair& p = pair(j);
  Real nk = sup_norm(p.k);
  switch (variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      return pow_amp(s, j) * LogAmplitude::from_log(+1, -Real(j) * nk);
    case ScheduleVariant::ii:
      return pow_amp(s, j) * LogAmplitude::from_log(+1, -(C / 2) * nk);
    case ScheduleVariant::iv:
      return pow_amp(s, 2) * LogAmplitude::from_log(+1, -Real(j) * nk);
    case ScheduleVariant::v:
      return p.inner0 * pow_amp(s, j) * LogAmplitude::from_log(+1, nk * s);
    case ScheduleVariant::vi:
      return p.inner0 * pow_amp(s, j) *
             LogAmplitude::from_log(+1, -Real(l + 1) * log(nk) - 2 * log(Real(j)));
    case ScheduleVariant::vii:
      return p.inner0 * pow_amp(s, j) * LogAmplitude::from_log(+1, nk * s * s);
  }
  return LogAmplitude::zero();
}

Real HamiltonianFamily::dphi(int j, const Real& s) const {
  const ResonancePair& p = pair(j);
  Real nk = sup_norm(p.k);
  auto spow = [&](long e) { return (e <= 0 && s == 0) ? Real(e == 0 ? 1 : 0) : Real(pow(s, static_cast<int>(e))); };
  switch (variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      return Real(j) * spow(j - 1) * exp(-Real(j) * nk);
    case ScheduleVariant::ii:
      return Real(j) * spow(j - 1) * exp(-(C / 2) * nk);
    case ScheduleVariant::iv:
      return 2 * s * exp(-Real(j) * nk);
    case ScheduleVariant::v:
      return p.inner0.to_real() * exp(nk * s) * (Real(j) * spow(j - 1) + nk * spow(j));
    case ScheduleVariant::vi:
      return p.inner0.to_real() * Real(j) * spow(j - 1) * pow(nk, -Real(l + 1)) /
             (Real(j) * j);
    case ScheduleVariant::vii:
      return p.inner0.to_real() * exp(nk * s * s) *
             (Real(j) * spow(j - 1) + 2 * nk * spow(j + 1));
  }
  return Real(0);
}

Real HamiltonianFamily::d2phi(int j, const Real& s) const {
  const ResonancePair& p = pair(j);
  Real nk = sup_norm(p.k);
  auto spow = [&](long e) { return (e <= 0 && s == 0) ? Real(e == 0 ? 1 : 0) : Real(pow(s, static_cast<int>(e))); };
  switch (variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      return Real(j) * (j - 1) * spow(j - 2) * exp(-Real(j) * nk);
    case ScheduleVariant::ii:
      return Real(j) * (j - 1) * spow(j - 2) * exp(-(C / 2) * nk);
    case ScheduleVariant::iv:
      return 2 * exp(-Real(j) * nk);
    case ScheduleVariant::v:
      return p.inner0.to_real() * exp(nk * s) *
             (Real(j) * (j - 1) * spow(j - 2) + 2 * Real(j) * nk * spow(j - 1) +
              nk * nk * spow(j));
    case ScheduleVariant::vi:
      return p.inner0.to_real() * Real(j) * (j - 1) * spow(j - 2) *
             pow(nk, -Real(l + 1)) / (Real(j) * j);
    case ScheduleVariant::vii:
      return p.inner0.to_real() * exp(nk * s * s) *
             (Real(j) * (j - 1) * spow(j - 2) + 2 * nk * (2 * j + 1) * spow(j) +
              4 * nk * nk * spow(j + 2));
  }
  return Real(0);
}

LogAmplitude HamiltonianFamily::phi_sup_log(int j, const Real& S) const {
  const ResonancePair& p = pair(j);
  Real nk = sup_norm(p.k);
  LogAmplitude Sj = LogAmplitude::from_real(S).pow_int(j);
  switch (variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      return Sj * LogAmplitude::from_log(+1, -Real(j) * nk);
    case ScheduleVariant::ii:
      return Sj * LogAmplitude::from_log(+1, -(C / 2) * nk);
    case ScheduleVariant::iv:
      return LogAmplitude::from_real(S).pow_int(2) *
             LogAmplitude::from_log(+1, -Real(j) * nk);
    case ScheduleVariant::v: {
      LogAmplitude mag = LogAmplitude::from_log(p.inner0.sign == 0 ? 0 : 1,
                                                p.inner0.log_mag);
      return mag * Sj * LogAmplitude::from_log(+1, nk * S);
    }
    case ScheduleVariant::vi: {
      LogAmplitude mag = LogAmplitude::from_log(p.inner0.sign == 0 ? 0 : 1,
                                                p.inner0.log_mag);
      return mag * Sj *
             LogAmplitude::from_log(+1, -Real(l + 1) * log(nk) - 2 * log(Real(j)));
    }
    case ScheduleVariant::vii: {
      LogAmplitude mag = LogAmplitude::from_log(p.inner0.sign == 0 ? 0 : 1,
                                                p.inner0.log_mag);
      return mag * Sj * LogAmplitude::from_log(+1, nk * S * S);
    }
  }
  return LogAmplitude::zero();
}

Real HamiltonianFamily::dphi_sup(int j, const Real& S) const {
  const ResonancePair& p = pair(j);
  Real nk = sup_norm(p.k);
  Real Sj1 = pow(S, j - 1), Sj = Sj1 * S;
  Real inner_mag = (p.inner0.sign == 0) ? Real(0) : Real(exp(p.inner0.log_mag));
  switch (variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      return Real(j) * Sj1 * exp(-Real(j) * nk);
    case ScheduleVariant::ii:
      return Real(j) * Sj1 * exp(-(C / 2) * nk);
    case ScheduleVariant::iv:
      return 2 * S * exp(-Real(j) * nk);
    case ScheduleVariant::v:
      return inner_mag * exp(nk * S) * (Real(j) * Sj1 + nk * Sj);
    case ScheduleVariant::vi:
      return inner_mag * Real(j) * Sj1 * pow(nk, -Real(l + 1)) / (Real(j) * j);
    case ScheduleVariant::vii:
      return inner_mag * exp(nk * S * S) * (Real(j) * Sj1 + 2 * nk * Sj * S);
  }
  return Real(0);
}

Real HamiltonianFamily::d2phi_sup(int j, const Real& S) const {
  const ResonancePair& p = pair(j);
  Real nk = sup_norm(p.k);
  Real Sj2 = (j >= 2) ? Real(pow(S, j - 2)) : Real(1);
  Real Sj1 = Sj2 * S, Sj = Sj1 * S;
  Real inner_mag = (p.inner0.sign == 0) ? Real(0) : Real(exp(p.inner0.log_mag));
  switch (variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      return Real(j) * (j - 1) * Sj2 * exp(-Real(j) * nk);
    case ScheduleVariant::ii:
      return Real(j) * (j - 1) * Sj2 * exp(-(C / 2) * nk);
    case ScheduleVariant::iv:
      return 2 * exp(-Real(j) * nk);
    case ScheduleVariant::v:
      return inner_mag * exp(nk * S) *
             (Real(j) * (j - 1) * Sj2 + 2 * Real(j) * nk * Sj1 + nk * nk * Sj);
    case ScheduleVariant::vi:
      return inner_mag * Real(j) * (j - 1) * Sj2 * pow(nk, -Real(l + 1)) /
             (Real(j) * j);
    case ScheduleVariant::vii:
      return inner_mag * exp(nk * S * S) *
             (Real(j) * (j - 1) * Sj2 + 2 * nk * (2 * j + 1) * Sj +
              4 * nk * nk * Sj * S * S);
  }
  return Real(0);
}

Real HamiltonianFamily::b(int j, const Real& s) const {
  const ResonancePair& p = pair(j);
  return p.inner0.to_real() + map.inner_shift(p.k, s);
}

Real HamiltonianFamily::db(int j, const Real& s) const {
  const ResonancePair& p = pair(j);
  switch (map.kind) {
    case MapVariant::constant:
      return Real(0);
    case MapVariant::hat:
      return Real(p.k[0]);
    case MapVariant::bar: {
      CompensatedSum acc;
      Real pw{1};
      for (std::size_t i = 0; i < p.k.size(); ++i) {
        if (p.k[i] != 0) acc.add(Real(i + 1) * Real(p.k[i]) * pw);
        pw *= s;
      }
      return acc.value();
    }
  }
  return Real(0);
}

Real eval_H(const HamiltonianFamily& F, const PhaseState& z) {
  const int dd = F.d();
  if (static_cast<int>(z.theta.size()) != dd || static_cast<int>(z.r.size()) != dd)
    throw error("eval_H: state dimension mismatch");
  const Real& s = z.r[dd - 1];
  std::vector<Real> w = F.map.eval(s);
  CompensatedSum acc;
  for (int i = 0; i < dd; ++i) acc.add(w[i] * z.r[i]);
  std::vector<Real> tt(z.theta.begin(), z.theta.end() - 1);
  for (int j = 2; j <= F.n(); ++j) {
    Real a = dot(F.pair(j).k, tt);
    acc.add(-F.phi(j, s) * sin(2 * pi() * mod1(a)));
  }
  return acc.value();
}

FieldValue vector_field(const HamiltonianFamily& F, const PhaseState& z) {
  const int dd = F.d();
  const Real& s = z.r[dd - 1];
  std::vector<Real> w = F.map.eval(s);
  std::vector<Real> dw = F.map.d1(s);
  FieldValue out;
  out.theta_dot.assign(dd, Real(0));
  out.r_dot.assign(dd, Real(0));
  for (int i = 0; i + 1 < dd; ++i) out.theta_dot[i] = w[i];
  // theta_d: omega_d(s) + <omega'(s), r> - sum phi_j'(s) sin(...)
  CompensatedSum td;
  td.add(w[dd - 1]);
  for (int i = 0; i < dd; ++i)
    if (dw[i] != 0) td.add(dw[i] * z.r[i]);
  std::vector<Real> tt(z.theta.begin(), z.theta.end() - 1);
  for (int j = 2; j <= F.n(); ++j) {
    Real a = mod1(dot(F.pair(j).k, tt));
    Real sn = sin(2 * pi() * a), cs = cos(2 * pi() * a);
    td.add(-F.dphi(j, s) * sn);
    Real amp = 2 * pi() * F.phi(j, s) * cs;
    const auto& k = F.pair(j).k;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (k[i] != 0) out.r_dot[i] += amp * Real(k[i]);
  }
  out.theta_dot[dd - 1] = td.value();
  out.r_dot[dd - 1] = 0;  // theta_d never appears in H
  return out;
}

namespace {

// One summand of the analytic tail bound, log domain.
LogAmplitude tail_term(const HamiltonianFamily& F, int j, const Real& nk,
                       const Real& u, const Real& Delta, const Real& rho) {
  Real radius = Delta + rho;
  Real twopid = 2 * pi() * F.d();
  LogAmplitude rad_j = LogAmplitude::from_real(radius).pow_int(j);
  switch (F.variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::iii:
      return rad_j * LogAmplitude::from_log(+1, nk * (twopid * rho - j));
    case ScheduleVariant::ii:
      return rad_j * LogAmplitude::from_log(+1, nk * (twopid * rho - F.C / 2));
    case ScheduleVariant::iv:
      return LogAmplitude::from_real(radius).pow_int(2) *
             LogAmplitude::from_log(+1, nk * (twopid * rho - j));
    case ScheduleVariant::v:
      return rad_j *
             LogAmplitude::from_log(+1, nk * (Delta + (twopid + 1) * rho - u));
    case ScheduleVariant::vi:
      return rad_j * LogAmplitude::from_log(
                         +1, -u * nk + nk * twopid * rho -
                                 Real(F.l + 1) * log(nk) - 2 * log(Real(j)));
    case ScheduleVariant::vii:
      return rad_j * LogAmplitude::from_log(
                         +1, nk * (radius * radius + twopid * rho - u));
  }
  return LogAmplitude::zero();
}

}  // namespace

LogAmplitude tail_bound(const HamiltonianFamily& F, int from,
                        std::optional<int> to, const Real& Delta,
                        const Real& rho, const Real& growth_hint) {
  if (from < 1) throw error("tail_bound: from >= 1 required");
  if (Delta < 0 || rho < 0) throw error("tail_bound: Delta, rho >= 0 required");
  const int n = F.n();
  LogAmplitude acc = LogAmplitude::zero();
  LogAmplitude prev = LogAmplitude::zero();
  bool first = true;

  auto u_of = [&](int j) {
    const auto& p = F.pair(j);
    Real nk = sup_norm(p.k);
    if (p.inner0.sign == 0) return Real(0);
    return Real(-p.inner0.log_mag / nk);
  };

  int jmax = to ? *to : n;
  for (int j = from + 1; j <= std::min(jmax, n); ++j) {
    LogAmplitude term = tail_term(F, j, sup_norm(F.pair(j).k), u_of(j), Delta, rho);
    if (!first && prev.abs_less(term))
      throw divergence_error("tail_bound: summand increases at j=" + std::to_string(j));
    prev = term;
    first = false;
    acc = acc + term;
  }
  if (to && *to <= n) return acc;
  if (to && *to > n)
    throw error("tail_bound: to beyond built pairs; use to=nullopt for the tail");

  // Infinite tail: extrapolate norms geometrically, freeze u at its last value.
  Real g = growth_hint;
  if (g <= 1) {
    if (F.pairs.size() >= 2) {
      Real a = sup_norm(F.pairs[F.pairs.size() - 2].k);
      Real bb = sup_norm(F.pairs.back().k);
      g = bb / a;
    } else {
      g = 2;
    }
  }
  if (g <= 1) throw divergence_error("tail_bound: no growing norm extrapolation");
  Real nk = sup_norm(F.pairs.back().k);
  Real u = u_of(n);
  const Real ln2 = log(Real(2));
  Real eps_log = -Real(precision_bits() + 16) * ln2;
  for (int j = std::max(from, n) + 1; j <= n + 100000; ++j) {
    nk *= g;
    LogAmplitude term = tail_term(F, j, nk, u, Delta, rho);
    if (!first && prev.abs_less(term))
      throw divergence_error("tail_bound: extrapolated summand increases at j=" +
                             std::to_string(j) + "; tail does not converge");
    prev = term;
    first = false;
    acc = acc + term;
    if (!acc.is_zero() && !term.is_zero() &&
        term.log_mag - acc.log_mag < eps_log)
      return acc;  // remaining terms below one ulp of the accumulated bound
    if (acc.is_zero() && term.is_zero()) return acc;
  }
  throw divergence_error("tail_bound: tail did not converge within 1e5 terms");
}

NextTermChoice choose_next_k(const HamiltonianFamily& F,
                             std::vector<ResonancePair> candidates,
                             const NextTermBudget& budget) {
  std::sort(candidates.begin(), candidates.end(),
            [](const ResonancePair& a, const ResonancePair& b) {
              return sup_norm(a.k) < sup_norm(b.k);
            });
  const int j = F.n() + 1;
  NextTermChoice out;
  HamiltonianFamily probe = F;
  for (auto& cand : candidates) {
    cand.j = j;
    probe.pairs = F.pairs;
    probe.pairs.push_back(cand);
    // C^0 bound of the added field term over |s| <= Delta:
    //   |r~ dot| <= 2 pi ||k|| |phi_j|, |theta_d dot| <= |phi_j'|
    LogAmplitude phi_sup = probe.phi_sup_log(j, budget.Delta);
    Real nk = sup_norm(cand.k);
    Real delta{0};
    if (!phi_sup.is_zero()) {
      Real p = phi_sup.to_real();
      delta = (std::max)(Real(2 * pi() * nk * p), probe.dphi_sup(j, budget.Delta));
    }
    Real dive = (budget.L > 0)
                    ? Real(delta * (exp(budget.L * budget.T) - 1) / budget.L)
                    : Real(delta * budget.T);
    if (dive <= budget.delta_req) {
      out.found = true;
      out.pair = cand;
      out.field_delta = delta;
      out.flow_divergence = dive;
      return out;
    }
  }
  out.note = "no candidate keeps the flow within delta_req over the horizon";
  return out;
}

}  // namespace qpt
