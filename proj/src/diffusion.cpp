#include "qpt/diffusion.hpp"

#include <algorithm>

#include "qpt/errors.hpp"
#include "qpt/rng.hpp"

namespace qpt {

namespace {

Real dist_to_torus(const PhaseState& z) { return sup_norm(z.r); }

Real b_at(const HamiltonianFamily& F, int n, const Real& s) {
  return F.b(n, s);
}

// Gronwall persistence: the largest field perturbation delta with
// delta (e^{Lt}-1)/L below the distance slack, in the log domain (t can be
// of order e^{hundreds}).
LogAmplitude persistence(const HamiltonianFamily& F, const Real& t,
                         const Real& slack, const Real& s_box,
                         const Real& r_box) {
  if (slack <= 0 || t <= 0) return LogAmplitude::zero();
  Real L = lipschitz_bound(F, abs(s_box) + Real(1) / 2, r_box);
  if (L == 0) return LogAmplitude::from_real(slack / t);
  Real Lt = L * t;
  Real denom_log = (Lt > 30) ? Lt : Real(log(exp(Lt) - 1));
  return LogAmplitude::from_log(+1, log(slack) + log(L) - denom_log);
}

}  // namespace

Real bound_s(const HamiltonianFamily& F, int n) {
  if (n < 2 || n > F.n()) throw error("bound_s: index out of range");
  switch (F.map.kind) {
    case MapVariant::hat:
    case MapVariant::bar:
      return F.pair(n).s;
    case MapVariant::constant:
      break;
  }
  switch (F.variant) {
    case ScheduleVariant::iii:
    case ScheduleVariant::iv:
      return exp(-Real(n) * n * sup_norm(F.pair(n).k));
    case ScheduleVariant::vi:
      return Real(1) / 2;
    default:
      return Real(1);  // box representative; v/vii sample their boxes
  }
}

PhaseState canonical_initial_condition(const HamiltonianFamily& F, int n,
                                       std::uint64_t seed) {
  if (n < 2 || n > F.n())
    throw error("canonical_initial_condition: index out of range");
  const int d = F.d();
  PhaseState z;
  z.theta.assign(d, Real(0));
  z.r.assign(d, Real(0));
  if (F.map.kind == MapVariant::constant &&
      (F.variant == ScheduleVariant::v || F.variant == ScheduleVariant::vii)) {
    // Sample the box the predicate quantifies over.
    CounterRng rng(seed);
    for (int i = 0; i < d; ++i) z.theta[i] = rng.uniform01();
    for (int i = 0; i + 1 < d; ++i) z.r[i] = rng.uniform(Real(-n), Real(n));
    Real s = rng.uniform(Real(1) / n, Real(n));
    if (F.variant == ScheduleVariant::vii && rng.next_u64() % 2 == 1) s = -s;
    z.r[d - 1] = s;
    return z;
  }
  z.r[d - 1] = bound_s(F, n);
  return z;
}

ABDecomposition decompose_AB(const HamiltonianFamily& F, int n,
                             const Real& t) {
  if (n < 2 || n > F.n()) throw error("decompose_AB: index out of range");
  const int d = F.d();
  PhaseState z0 = canonical_initial_condition(F, n, 0);
  if (F.map.kind == MapVariant::constant &&
      (F.variant == ScheduleVariant::v || F.variant == ScheduleVariant::vii))
    throw error("decompose_AB: defined at the canonical (theta = 0) state only");
  const Real& s = z0.r[d - 1];
  Real tol = 10 * F.residual_tol;
  ABDecomposition ab;
  ab.A.assign(d - 1, Real(0));
  ab.B.assign(d - 1, Real(0));
  CompensatedSum bb;
  for (int j = 2; j <= n; ++j) {
    const auto& k = F.pair(j).k;
    Real phi = F.phi(j, s);
    Real G = action_kick(Real(0), b_at(F, j, s), t, tol);
    std::vector<Real>& dst = (j == n) ? ab.A : ab.B;
    for (int i = 0; i + 1 < d; ++i)
      if (k[i] != 0) dst[i] += phi * Real(k[i]) * G;
    if (j < n) {
      Real bj = abs(b_at(F, j, s));
      if (bj == 0)
        throw resonance_error("decompose_AB: vanishing denominator at j=" +
                              std::to_string(j));
      bb.add(2 * sup_norm(k) * abs(phi) / bj);
    }
  }
  ab.bound_B = bb.value();
  return ab;
}

DiffusionReport escape_time(const HamiltonianFamily& F, int n,
                            const PhaseState& z, const Real& target,
                            const Real& t_max, EscapeStrategy strategy) {
  if (target <= dist_to_torus(z))
    throw error("escape_time: target must exceed the initial distance");
  DiffusionReport rep;
  rep.witness = z;
  const Real s = z.r[F.d() - 1];

  auto dist_at = [&](const Real& t) {
    return dist_to_torus(exact_flow(F, z, t));
  };
  auto finish = [&](const Real& t, const Real& dist) {
    rep.escape_time = LogAmplitude::from_real(t);
    rep.threshold_reached = dist;
    rep.margin = dist / target;
    rep.pass = dist >= target;
    if (rep.pass)
      rep.persistence_delta = persistence(F, t, dist - target, s, 2 * dist);
    return rep;
  };

  if (strategy == EscapeStrategy::closed_form_root) {
    // Invert the dominant (j = n) secular slope, then verify with exact_flow.
    std::vector<Real> tt(z.theta.begin(), z.theta.end() - 1);
    Real a = mod1(dot(F.pair(n).k, tt));
    Real slope =
        2 * pi() * abs(F.phi(n, s)) * sup_norm(F.pair(n).k) * abs(cos(2 * pi() * a));
    if (slope == 0)
      throw error("escape_time: no secular slope at this state");
    Real t = target / slope;
    if (t > t_max) {
      rep.note = "closed-form root beyond t_max";
      return finish(t_max, dist_at(t_max));
    }
    Real dist = dist_at(t);
    for (int i = 0; i < 200 && dist < target; ++i) {
      t *= 1 + Real("1e-25");
      dist = dist_at(t);
    }
    if (dist < target) rep.note = "secular root did not verify";
    return finish(t, dist);
  }

  if (strategy == EscapeStrategy::bisection_on_exact_flow) {
    Real hi = (std::min)(Real(1), t_max);
    Real best_d{0}, best_t{0};
    while (true) {
      Real dh = dist_at(hi);
      if (dh > best_d) {
        best_d = dh;
        best_t = hi;
      }
      if (dh >= target) break;
      if (hi >= t_max) {
        rep.note = "target not reached within t_max";
        return finish(best_t, best_d);
      }
      hi = (std::min)(Real(2 * hi), t_max);
    }
    Real lo = hi / 2;
    for (int i = 0; i < 256 && (hi - lo) > hi * Real("1e-30"); ++i) {
      Real mid = (lo + hi) / 2;
      if (dist_at(mid) >= target)
        hi = mid;
      else
        lo = mid;
    }
    return finish(hi, dist_at(hi));
  }

  // numeric_fallback: cumulative numeric integration on a doubling grid.
  NumericOptions opt;
  PhaseState cur = z;
  Real t{0}, step{Real("0.25")};
  Real best_d = dist_to_torus(z), best_t{0};
  while (t < t_max) {
    Real dt = (std::min)(step, Real(t_max - t));
    cur = numeric_flow(F, cur, dt, opt);
    t += dt;
    Real dcur = dist_to_torus(cur);
    if (dcur > best_d) {
      best_d = dcur;
      best_t = t;
    }
    if (dcur >= target) return finish(t, dcur);
    step *= 2;
  }
  rep.note = "target not reached within t_max (numeric)";
  return finish(best_t, best_d);
}

namespace {

ScheduleVariant expected_variant(int index) {
  switch (index) {
    case 1: return ScheduleVariant::i;
    case 2: return ScheduleVariant::ii;
    case 3: return ScheduleVariant::iii;
    case 4: return ScheduleVariant::iv;
    case 5: return ScheduleVariant::v;
    case 6: return ScheduleVariant::vii;
  }
  throw error("check_property: property index must be 1..6");
}

// P5/P6 box sweep.  Angles that the dynamics never reads (theta_d) are held
// at 0; the remaining coordinates are gridded.
DiffusionReport box_property(const HamiltonianFamily& F, int n,
                             const PropertyId& prop, int g, bool both_signs) {
  DiffusionReport rep;
  rep.property = prop;
  rep.grid_only = true;
  const int d = F.d();
  Real bn = abs(F.pair(n).inner0.to_real());
  if (bn == 0) throw resonance_error("box sweep: exactly resonant pair n");
  Real T = Real("1.1") / bn;
  const int M = 128;
  Real required = Real(prop.n) * (1 + Real("1e-20"));

  // Coordinates: theta~ (d-1), r~ (d-1), s (1); odometer over g^(2d-1) points
  // (doubled over the sign of s for Q_n).
  int dims = 2 * (d - 1) + 1;
  std::vector<int> idx(dims, 0);
  Real worst_t{0};
  bool all_pass = true;
  long points = 0;
  while (true) {
    for (int sgn = 0; sgn < (both_signs ? 2 : 1); ++sgn) {
      PhaseState z;
      z.theta.assign(d, Real(0));
      z.r.assign(d, Real(0));
      for (int i = 0; i + 1 < d; ++i)
        z.theta[i] = (Real(idx[i]) + Real(1) / 2) / g;
      for (int i = 0; i + 1 < d; ++i)
        z.r[i] = -prop.n + Real(2 * prop.n) * idx[d - 1 + i] / (std::max)(g - 1, 1);
      Real s = Real(1) / prop.n +
               (Real(prop.n) - Real(1) / prop.n) * idx[dims - 1] / (std::max)(g - 1, 1);
      z.r[d - 1] = sgn ? Real(-s) : s;
      ++points;
      bool escaped = false;
      for (int m = 1; m <= M; ++m) {
        Real t = T * m / M;
        if (dist_to_torus(exact_flow(F, z, t)) > required) {
          escaped = true;
          if (t > worst_t) {
            worst_t = t;
            rep.witness = z;
          }
          break;
        }
      }
      if (!escaped) {
        all_pass = false;
        rep.witness = z;
        Real best{0};
        for (int m = 1; m <= M; ++m)
          best = (std::max)(best, dist_to_torus(exact_flow(F, z, T * m / M)));
        rep.threshold_reached = best;
        rep.margin = best / required;
        rep.note = "grid point failed to escape within 1.1/|b_n|";
        break;
      }
    }
    if (!all_pass) break;
    int p = 0;
    while (p < dims && ++idx[p] == g) idx[p++] = 0;
    if (p == dims) break;
  }
  if (all_pass) {
    rep.pass = true;
    rep.escape_time = LogAmplitude::from_real(worst_t);
    rep.threshold_reached = required;
    rep.margin = 1;
    rep.note = "grid-verified: " + std::to_string(points) + " points, horizon 1.1/|b_n|";
    PhaseState w = rep.witness;
    Real dist = dist_to_torus(exact_flow(F, w, worst_t));
    rep.persistence_delta = persistence(F, worst_t, dist - required,
                                        Real(prop.n), 2 * dist);
  }
  return rep;
}

}  // namespace

DiffusionReport check_property(const HamiltonianFamily& F, int n,
                               const PropertyId& prop, int grid_per_dim) {
  if (F.variant != expected_variant(prop.index))
    throw variant_error("check_property: schedule variant does not match P" +
                        std::to_string(prop.index));
  if (prop.index == 5 || prop.index == 6)
    return box_property(F, n, prop, grid_per_dim, prop.index == 6);

  PhaseState z = canonical_initial_condition(F, n, 0);
  Real r0 = dist_to_torus(z);
  DiffusionReport rep;
  if (r0 > Real(1) / prop.n) {
    rep.property = prop;
    rep.witness = z;
    rep.note = "initial condition violates ||z|| <= 1/n";
    return rep;
  }

  if (prop.index == 1 || prop.index == 2) {
    Real target = (prop.index == 1) ? Real(Real(prop.n) * (1 + Real("1e-20")))
                                    : Real((1 / r0) * (1 + Real("1e-20")));
    LogAmplitude pred = predicted_escape_time(F, n, target);
    Real t_max;
    Real log_tbound{0};
    if (prop.index == 2) {
      log_tbound = prop.C * pow(r0, -1 / (prop.tau + 1));
      t_max = exp(log_tbound);
    } else {
      t_max = (pred * LogAmplitude::from_real(Real(10))).to_real();
    }
    rep = escape_time(F, n, z, target, t_max, EscapeStrategy::closed_form_root);
    rep.property = prop;
    if (prop.index == 2 && rep.pass && rep.escape_time.log_mag > log_tbound) {
      rep.pass = false;
      rep.note = "escape found but log t exceeds C ||z||^{-1/(tau+1)}";
    }
    return rep;
  }

  // P3 / P4: evaluate at the time-bound scale (and the quarter-period if it
  // is earlier); the near-resonant j = n term does the work.
  rep.property = prop;
  rep.witness = z;
  const Real& s = z.r[F.d() - 1];
  Real target = 1 / r0;
  Real power = (prop.index == 3) ? Real(2 * n) : Real(4);
  Real log_tbound = -power * log(r0);
  Real t1 = exp(log_tbound);
  Real bn = abs(F.b(n, s));
  std::vector<Real> candidates{t1};
  if (bn > 0 && 1 / (4 * bn) < t1) candidates.push_back(1 / (4 * bn));
  Real best_d{0}, best_t{0};
  for (const Real& t : candidates) {
    Real dcur = dist_to_torus(exact_flow(F, z, t));
    if (dcur > best_d) {
      best_d = dcur;
      best_t = t;
    }
  }
  rep.escape_time = LogAmplitude::from_real(best_t);
  rep.threshold_reached = best_d;
  rep.margin = best_d / target;
  rep.pass = best_d > target;
  // Oscillation-vs-linear side inequality at the witnessed time.
  Real lhs = abs(sin(2 * pi() * mod1_fma(F.b(n, s), best_t, Real(0))));
  Real rhs = bn * best_t;
  if (lhs <= rhs) {
    rep.pass = false;
    rep.note = "|sin(2 pi b_n t)| <= |b_n| t at the witnessed time";
  }
  if (rep.pass)
    rep.persistence_delta =
        persistence(F, best_t, best_d - target, s, 2 * best_d);
  if (prop.index == 3)
    rep.note += std::string(rep.note.empty() ? "" : "; ") +
                "alt bound t <= r^-n: " +
                ((log(best_t) <= -Real(n) * log(r0)) ? "holds" : "exceeded");
  return rep;
}

LogAmplitude predicted_escape_time(const HamiltonianFamily& F, int n,
                                   const Real& target) {
  if (target < 0) throw error("predicted_escape_time: target >= 0");
  if (target == 0) return LogAmplitude::zero();
  Real s = bound_s(F, n);
  Real nk = sup_norm(F.pair(n).k);
  switch (F.variant) {
    case ScheduleVariant::i:
    case ScheduleVariant::ii: {
      LogAmplitude slope = LogAmplitude::from_real(2 * pi() * nk) *
                           F.phi_log(n, s);
      if (slope.is_zero())
        throw error("predicted_escape_time: zero secular slope");
      return LogAmplitude::from_real(target) /
             LogAmplitude::from_log(+1, slope.log_mag);
    }
    case ScheduleVariant::iii:
      return LogAmplitude::from_log(+1, 2 * Real(n) * Real(n) * n * nk);
    case ScheduleVariant::iv:
      return LogAmplitude::from_log(+1, 4 * Real(n) * n * nk);
    default:
      throw variant_error(
          "predicted_escape_time: no secular structure for schedules v-vii");
  }
}

}  // namespace qpt
