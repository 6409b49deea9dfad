#include "qpt/flow.hpp"

#include <algorithm>

#include "qpt/errors.hpp"

namespace qpt {

namespace {

// Per-term quadratures.  With phase a + b t (cycles) the action kick is
//   G(t)   = int_0^t 2 pi cos(2 pi (a + b u)) du,
//   IG(t)  = int_0^t G(u) du,
//   IS(t)  = int_0^t sin(2 pi (a + b u)) du.
// Closed forms divide by b (or b^2), so near-resonant terms switch to the
// secular limit and a Taylor corridor bridges the cancellation-prone regime.
struct TermQuadratures {
  // Decomposition used to keep theta_d accurate at huge t:
  //   contribution = lin * t + quad * t^2 + cubic * t^3 + bounded.
  Real G{0};          // total action kick (already evaluated at t)
  Real IG_lin{0};     // linear-in-t part of IG, coefficient
  Real IG_rest{0};    // IG minus IG_lin * t (bounded or polynomial, evaluated)
  Real IS_lin{0};
  Real IS_rest{0};
};

TermQuadratures quadratures(const Real& a, const Real& b, const Real& t,
                            const Real& secular_tol) {
  TermQuadratures q;
  const Real twopi = 2 * pi();
  Real sa = sin(twopi * a), ca = cos(twopi * a);
  if (abs(b) <= secular_tol) {
    // Exact resonance: phase frozen at a.
    q.G = twopi * t * ca;
    q.IG_rest = pi() * t * t * ca;
    q.IS_lin = sa;
    return q;
  }
  Real bt = b * t;
  if (abs(twopi * bt) < Real("1e-10")) {
    // Taylor corridor: closed forms lose all digits to cancellation here.
    q.G = twopi * t * ca - 2 * pi() * pi() * bt * t * sa;
    q.IG_rest = pi() * t * t * ca -
                Real(2) / 3 * pi() * pi() * bt * t * t * sa;
    q.IS_lin = sa;
    q.IS_rest = pi() * bt * t * ca;
    return q;
  }
  // Generic closed form; reduce the phase a + b t mod 1 at extended
  // precision so sin/cos stay accurate for arbitrarily large t.
  Real ph = mod1_fma(b, t, a);
  Real sp = sin(twopi * ph), cp = cos(twopi * ph);
  q.G = (sp - sa) / b;
  q.IG_lin = -sa / b;
  q.IG_rest = (ca - cp) / (twopi * b * b);
  q.IS_rest = (ca - cp) / (twopi * b);
  return q;
}

std::vector<Real> flatten(const PhaseState& z) {
  std::vector<Real> y = z.theta;
  y.insert(y.end(), z.r.begin(), z.r.end());
  return y;
}

PhaseState unflatten(const std::vector<Real>& y, int d) {
  PhaseState z;
  z.theta.assign(y.begin(), y.begin() + d);
  z.r.assign(y.begin() + d, y.end());
  return z;
}

}  // namespace

Real action_kick(const Real& a, const Real& b, const Real& t,
                 const Real& secular_tol) {
  return quadratures(a, b, t, secular_tol).G;
}

PhaseState exact_flow(const HamiltonianFamily& F, const PhaseState& z0,
                      const Real& t) {
  const int d = F.d();
  if (static_cast<int>(z0.theta.size()) != d ||
      static_cast<int>(z0.r.size()) != d)
    throw error("exact_flow: state dimension mismatch");
  const Real& s = z0.r[d - 1];
  std::vector<Real> w = F.map.eval(s);
  std::vector<Real> dw = F.map.d1(s);

  PhaseState z = z0;
  // Rigid rotation of the first d-1 angles.
  for (int i = 0; i + 1 < d; ++i) z.theta[i] = mod1_fma(w[i], t, z0.theta[i]);

  // theta_d drift independent of the trigonometric terms:
  //   omega_d(s) + <omega'(s), r0>.
  CompensatedSum drift;
  drift.add(w[d - 1]);
  for (int i = 0; i < d; ++i)
    if (dw[i] != 0) drift.add(dw[i] * z0.r[i]);

  std::vector<Real> tt(z0.theta.begin(), z0.theta.end() - 1);
  CompensatedSum theta_d_rest;  // bounded / polynomial-in-t pieces
  Real secular_tol = 10 * F.residual_tol;
  for (int j = 2; j <= F.n(); ++j) {
    const auto& k = F.pair(j).k;
    Real a = mod1(dot(k, tt));
    Real b = F.b(j, s);
    Real phi = F.phi(j, s);
    Real dphi = F.dphi(j, s);
    Real c = F.db(j, s);  // <d omega~/ds, k_j>
    TermQuadratures q = quadratures(a, b, t, secular_tol);
    if (phi != 0) {
      for (int i = 0; i + 1 < d; ++i)
        if (k[i] != 0) z.r[i] += phi * Real(k[i]) * q.G;
      if (c != 0) {
        drift.add(phi * c * q.IG_lin);
        theta_d_rest.add(phi * c * q.IG_rest);
      }
    }
    if (dphi != 0) {
      drift.add(-dphi * q.IS_lin);
      theta_d_rest.add(-dphi * q.IS_rest);
    }
  }
  z.theta[d - 1] =
      mod1(mod1_fma(drift.value(), t, z0.theta[d - 1]) + theta_d_rest.value());
  return z;
}

PhaseState numeric_flow(const HamiltonianFamily& F, const PhaseState& z0,
                        const Real& t, const NumericOptions& opt) {
  // Dormand-Prince 5(4) with standard coefficients and error-per-step control.
  static const double A[7][6] = {
      {0, 0, 0, 0, 0, 0},
      {1.0 / 5, 0, 0, 0, 0, 0},
      {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
      {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
      {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
      {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
       -5103.0 / 18656, 0},
      {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
  // 5th-order weights equal row 7 of A; embedded 4th-order weights:
  static const double B4[7] = {5179.0 / 57600, 0,           7571.0 / 16695,
                               393.0 / 640,    -92097.0 / 339200,
                               187.0 / 2100,   1.0 / 40};

  const int d = F.d();
  const int m = 2 * d;
  auto rhs = [&](const std::vector<Real>& y) {
    FieldValue f = vector_field(F, unflatten(y, d));
    std::vector<Real> dy = f.theta_dot;
    dy.insert(dy.end(), f.r_dot.begin(), f.r_dot.end());
    return dy;
  };

  std::vector<Real> y = flatten(z0);
  Real time{0};
  int dir = (t >= 0) ? 1 : -1;
  Real T = abs(t);
  if (T == 0) return z0;
  Real h = (std::min)(opt.initial_step, T);
  std::vector<std::vector<Real>> K(7);
  for (long step = 0; step < opt.max_steps; ++step) {
    if (time >= T) break;
    if (time + h > T) h = T - time;
    Real hs = dir * h;
    K[0] = rhs(y);
    for (int st = 1; st < 7; ++st) {
      std::vector<Real> ys = y;
      for (int i = 0; i < m; ++i) {
        CompensatedSum acc;
        for (int p = 0; p < st; ++p)
          if (A[st][p] != 0) acc.add(Real(A[st][p]) * K[p][i]);
        ys[i] += hs * acc.value();
      }
      K[st] = rhs(ys);
    }
    // 5th-order solution is ys from the last stage evaluation (FSAL row).
    std::vector<Real> y5(m), err(m);
    Real errnorm{0};
    for (int i = 0; i < m; ++i) {
      CompensatedSum acc5, acc4;
      for (int p = 0; p < 7; ++p) {
        if (A[6][p] != 0) acc5.add(Real(A[6][p]) * K[p][i]);
        if (B4[p] != 0) acc4.add(Real(B4[p]) * K[p][i]);
      }
      y5[i] = y[i] + hs * acc5.value();
      Real e = abs(hs * (acc5.value() - acc4.value()));
      Real sc = opt.atol + opt.rtol * (std::max)(abs(y[i]), abs(y5[i]));
      errnorm = (std::max)(errnorm, Real(e / sc));
    }
    if (errnorm <= 1) {
      y = y5;
      time += h;
    }
    Real fac = (errnorm == 0)
                   ? Real(5)
                   : Real(Real("0.9") * pow(errnorm, Real(-1) / 5));
    fac = (std::min)(Real(5), (std::max)(Real("0.2"), fac));
    h *= fac;
    if (h < T * Real("1e-40"))
      throw precision_error("numeric_flow: step size underflow");
  }
  if (time < T) throw precision_error("numeric_flow: max_steps exceeded");
  PhaseState z = unflatten(y, d);
  for (auto& th : z.theta) th = mod1(th);
  return z;
}

Trajectory sample_trajectory(const HamiltonianFamily& F, const PhaseState& z0,
                             const Real& t_end, int samples, bool exact,
                             const NumericOptions& opt) {
  if (samples < 2) throw error("sample_trajectory: samples >= 2 required");
  Trajectory traj;
  traj.method = exact ? "exact" : "dopri5";
  PhaseState cur = z0;
  for (int i = 0; i < samples; ++i) {
    Real ti = t_end * i / (samples - 1);
    PhaseState zi;
    if (exact) {
      zi = exact_flow(F, z0, ti);
    } else if (i == 0) {
      zi = z0;
    } else {
      Real tprev = t_end * (i - 1) / (samples - 1);
      zi = numeric_flow(F, cur, ti - tprev, opt);
    }
    cur = zi;
    traj.times.push_back(ti);
    traj.energies.push_back(eval_H(F, zi));
    traj.states.push_back(std::move(zi));
  }
  return traj;
}

Real lipschitz_bound(const HamiltonianFamily& F, const Real& Delta,
                     const Real& R) {
  const int d = F.d();
  std::vector<Real> dw = F.map.d1(Delta), dwm = F.map.d1(-Delta);
  std::vector<Real> d2w = F.map.d2(Delta), d2wm = F.map.d2(-Delta);
  for (int i = 0; i < d; ++i) {
    dw[i] = (std::max)(abs(dw[i]), abs(dwm[i]));
    d2w[i] = (std::max)(abs(d2w[i]), abs(d2wm[i]));
  }
  // Row theta~_i: only depends on s.
  Real row_tt{0};
  for (int i = 0; i + 1 < d; ++i) row_tt = (std::max)(row_tt, dw[i]);
  // Row theta_d.
  CompensatedSum row_td;
  for (int i = 0; i < d; ++i) row_td.add(dw[i]);  // d/dr
  for (int i = 0; i + 1 < d; ++i) row_td.add(d2w[i] * R);  // d/ds via omega''
  row_td.add(d2w[d - 1] * Delta);
  CompensatedSum row_r;  // worst row among the r~ equations (summed crudely)
  for (int j = 2; j <= F.n(); ++j) {
    Real nk = sup_norm(F.pair(j).k);
    Real ps = F.phi_sup_log(j, Delta).is_zero()
                  ? Real(0)
                  : F.phi_sup_log(j, Delta).to_real();
    if (ps < 0) ps = -ps;
    Real dps = F.dphi_sup(j, Delta);
    Real d2ps = F.d2phi_sup(j, Delta);
    row_td.add(2 * pi() * nk * dps);  // d/dtheta~ of the phi' sin term
    row_td.add(d2ps);                 // d/ds
    row_r.add(4 * pi() * pi() * ps * nk * nk * (d - 1));  // d/dtheta~
    row_r.add(2 * pi() * dps * nk);                       // d/ds
  }
  return (std::max)({row_tt, row_td.value(), row_r.value()});
}

Real gronwall_bound(const Real& delta, const Real& L, const Real& T) {
  if (L <= 0) return delta * T;
  return delta * (exp(L * T) - 1) / L;
}

}  // namespace qpt
