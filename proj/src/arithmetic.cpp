#include "qpt/arithmetic.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace qpt {

namespace {

// Forward rounding-error bound for a compensated inner product of d terms at
// the working precision: err <= (d + 2) * 2^{1-prec} * sum |omega_i k_i|.
Real inner_error_bound(const std::vector<Real>& omega,
                       const std::vector<long>& k) {
  Real mag{0};
  for (std::size_t i = 0; i < k.size(); ++i) mag += abs(omega[i]) * abs(Real(k[i]));
  return (Real(omega.size()) + 2) * ldexp(mag, 1 - static_cast<int>(precision_bits()));
}

bool lex_less(const std::vector<long>& a, const std::vector<long>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

long sup_norm_l(const std::vector<long>& k) {
  long m = 0;
  for (long v : k) m = std::max(m, std::abs(v));
  return m;
}

// Convert an exactly representable Real (MPFR values are dyadic rationals)
// to an exact Rational.
Rational to_rational_exact(const Real& x) {
  Rational q;
  mpfr_get_q(q.backend().data(), x.backend().data());
  return q;
}

struct ScanResult {
  Real min_value{0};        // |<omega,k>| * ||k||^tau at the minimizer
  Real min_inner{0};        // |<omega,k>| at the minimizer
  std::vector<long> worst_k;
  bool resonant = false;
  bool undecided = false;   // rounding could not separate min_inner from 0
};

// Exhaustive scan over 0 < ||k||_sup <= K, k canonical (first nonzero > 0).
ScanResult box_scan(const std::vector<Real>& omega, long K, const Real& tau) {
  const int d = static_cast<int>(omega.size());
  std::vector<long> k(d, -K);
  ScanResult best;
  bool have = false;
  while (true) {
    // canonical representative of {k, -k}: first nonzero component positive
    int fn = -1;
    for (int i = 0; i < d; ++i)
      if (k[i] != 0) { fn = i; break; }
    if (fn >= 0 && k[fn] > 0) {
      Real ip{0};
      CompensatedSum s;
      for (int i = 0; i < d; ++i) s.add(omega[i] * k[i]);
      ip = abs(s.value());
      Real err = inner_error_bound(omega, k);
      long nk = sup_norm_l(k);
      Real value = ip * pow(Real(nk), tau);
      bool better = false;
      if (!have) {
        better = true;
      } else if (value < best.min_value) {
        better = true;
      } else if (value == best.min_value) {
        long bn = sup_norm_l(best.worst_k);
        if (nk < bn || (nk == bn && lex_less(k, best.worst_k))) better = true;
      }
      if (better) {
        have = true;
        best.min_value = value;
        best.min_inner = ip;
        best.worst_k = k;
        best.resonant = (ip <= err);
        best.undecided = (!best.resonant && ip <= 2 * err);
      }
    }
    // odometer
    int i = d - 1;
    while (i >= 0 && k[i] == K) { k[i] = -K; --i; }
    if (i < 0) break;
    ++k[i];
  }
  if (best.resonant) best.min_value = 0;
  return best;
}

Real neg_inf() { return -std::numeric_limits<Real>::infinity(); }

DiophantineResult diophantineresult_from_scan(const ScanResult& sc, const Real& gamma) {
  DiophantineResult r;
  r.min_value = sc.min_value;
  r.worst_k.assign(sc.worst_k.begin(), sc.worst_k.end());
  r.resonant = sc.resonant;
  if (sc.resonant) {
    r.pass = false;
    return r;
  }
  if (sc.undecided)
    throw precision_error(
        "diophantine_check: minimum not separable from zero at this precision");
  Real margin = abs(sc.min_value - gamma);
  // value error magnified by the same relative factor as the inner product
  Real rel = ldexp(Real(sc.worst_k.size() + 4), 1 - static_cast<int>(precision_bits()));
  if (margin <= sc.min_value * rel && gamma > 0)
    throw precision_error("diophantine_check: comparison against gamma straddles "
                          "the rounding-error bar; raise precision");
  r.pass = sc.min_value > gamma;
  return r;
}

}  // namespace

DiophantineResult diophantine_check(const std::vector<Real>& omega, long K,
                                    const Real& tau, const Real& gamma) {
  if (omega.size() < 2) throw error("diophantine_check: need d >= 2");
  if (K < 1) throw error("diophantine_check: need K >= 1");
  return diophantineresult_from_scan(box_scan(omega, K, tau), gamma);
}

FrequencyVector construct_superliouville(int d, int depth,
                                         std::vector<long long> exponents) {
  if (d < 3) throw error("construct_superliouville: need d >= 3");
  if (depth < 1)
    throw resonance_error(
        "construct_superliouville: depth < 1 leaves alpha a bare rational "
        "(no Liouville witnesses); refusing");
  const int terms = depth + 2;
  if (exponents.empty()) {
    exponents.push_back(2);
    for (int m = 1; m < terms; ++m) {
      long long prev = exponents.back();
      if (prev > 62)
        throw capacity_error(
            "construct_superliouville: tower exponent 2^" + std::to_string(prev) +
            " exceeds representable exponent range (depth too large for the "
            "default growth)");
      exponents.push_back(static_cast<long long>(m) * (1ll << prev));
    }
  }
  if (static_cast<int>(exponents.size()) < terms)
    throw error("construct_superliouville: exponent list shorter than depth+2");
  exponents.resize(terms);
  for (int m = 0; m + 1 < terms; ++m)
    if (exponents[m] >= exponents[m + 1] || exponents[m] < 1)
      throw error("construct_superliouville: exponents must be positive and "
                  "strictly increasing");

  FrequencyVector fv;
  fv.kind = FrequencyVector::Kind::superliouville;
  fv.tower_exponents = exponents;

  // alpha at working precision (terms below one ulp vanish, by design)
  CompensatedSum alpha_sum;
  for (int m = 0; m < terms; ++m)
    alpha_sum.add(pow(Real(2), -Real(exponents[m])));
  Real alpha = alpha_sum.value();

  fv.omega.resize(d);
  fv.omega[0] = 1;
  fv.omega[1] = alpha;
  static const int primes[] = {3, 5, 7, 11, 13, 17, 19, 23, 29, 31};
  for (int i = 2; i < d; ++i) {
    if (i - 2 >= static_cast<int>(sizeof(primes) / sizeof(primes[0])))
      throw capacity_error("construct_superliouville: d too large for filler table");
    fv.omega[i] = sqrt(Real(primes[i - 2]));
  }

  // Exact rational alpha for cross-checks, while denominators stay sane.
  const long long kExactBudget = 4096;
  bool exact_ok = exponents[terms - 1] <= kExactBudget;
  Rational alpha_exact{0};
  if (exact_ok) {
    for (int m = 0; m < terms; ++m) {
      Rational term(Integer(1), Integer(1) << exponents[m]);
      alpha_exact += term;
    }
  }

  Real ln2 = log(Real(2));
  Real prev_ratio{0};
  for (int m = 1; m <= depth + 1; ++m) {  // witness index, 1-based
    long long am = exponents[m - 1];
    if (am > (1ll << 30))
      throw capacity_error("construct_superliouville: witness norm 2^" +
                           std::to_string(am) + " not representable exactly");
    LiouvilleWitness w;
    Integer q = Integer(1) << am;
    Integer p{0};
    for (int mp = 0; mp < m; ++mp) p += Integer(1) << (am - exponents[mp]);
    w.k.assign(static_cast<std::size_t>(d - 1), Integer(0));
    w.k[0] = -p;
    w.k[1] = q;
    // inner = sum_{m' > m} 2^{a_m - a_m'} = 2^{a_m - a_{m+1}} (1 + rest)
    Real lead = (Real(am) - Real(exponents[m])) * ln2;
    Real rest{0};
    for (int mp = m + 1; mp < terms; ++mp)
      rest += pow(Real(2), Real(exponents[m]) - Real(exponents[mp]));
    w.inner = LogAmplitude::from_log(+1, lead + log1p(rest));
    w.ratio = w.inner.log_mag / Real(q);
    if (exact_ok) {
      Rational inner_exact = Rational(q) * alpha_exact - Rational(p);
      if (inner_exact <= 0)
        throw error("construct_superliouville: exact witness check failed (sign)");
      Real lg = log(Real(numerator(inner_exact))) - log(Real(denominator(inner_exact)));
      if (abs(lg - w.inner.log_mag) > Real("1e-60") * (1 + abs(lg)))
        throw error("construct_superliouville: exact witness check failed (magnitude)");
      w.exact_checked = true;
    }
    if (m >= 2 && !(w.ratio < prev_ratio))
      throw error("construct_superliouville: Liouville ratios must strictly "
                  "decrease; exponent list is not super-Liouville");
    prev_ratio = w.ratio;
    fv.witnesses.push_back(std::move(w));
  }
  return fv;
}

BestApprox dirichlet_best(const std::vector<Real>& omega2, long long K) {
  if (omega2.size() != 2) throw error("dirichlet_best: omega' must have 2 components");
  if (K < 1) throw error("dirichlet_best: need K >= 1");
  BestApprox best;
  bool have = false;
  auto consider = [&](long long k1, long long k2) {
    if (k1 == 0 && k2 == 0) return;
    // canonical sign
    if (k1 < 0 || (k1 == 0 && k2 < 0)) { k1 = -k1; k2 = -k2; }
    if (std::max(std::llabs(k1), std::llabs(k2)) > K) return;
    Real ip = abs(omega2[0] * k1 + omega2[1] * k2);
    std::vector<Integer> kk{Integer(k1), Integer(k2)};
    bool better = false;
    if (!have) better = true;
    else if (ip < best.value) better = true;
    else if (ip == best.value) {
      Integer nk = (std::max)(abs(kk[0]), abs(kk[1]));
      Integer nb = (std::max)(abs(best.k[0]), abs(best.k[1]));
      if (nk < nb || (nk == nb && kk < best.k)) better = true;
    }
    if (better) { have = true; best.value = ip; best.k = kk; }
  };
  if (K <= 4096) {
    for (long long k1 = -K; k1 <= K; ++k1)
      for (long long k2 = -K; k2 <= K; ++k2) consider(k1, k2);
  } else {
    // Large boxes: for each k2 the minimizing k1 is the nearest integer to
    // -k2*omega2/omega1 (omega1 must be nonzero).
    if (omega2[0] == 0) throw error("dirichlet_best: large-box scan needs omega_1 != 0");
    consider(1, 0);
    for (long long k2 = 1; k2 <= K; ++k2) {
      Real t = -Real(k2) * omega2[1] / omega2[0];
      Integer n = Integer(round(t));
      long long k1 = n.convert_to<long long>();
      consider(k1, k2);
      consider(k1 - 1, k2);
      consider(k1 + 1, k2);
    }
  }
  // resonance: value indistinguishable from zero
  std::vector<long> kl{best.k[0].convert_to<long>(), best.k[1].convert_to<long>()};
  Real err = inner_error_bound(omega2, kl);
  best.resonant = (best.value <= err);
  return best;
}

namespace {

// Solve quad*s^2 + lin*s + c0 = 0 for the real root nearest zero (quad may be
// zero).  Returns false if no real root exists.
bool root_nearest_zero(const Real& quad, const Real& lin, const Real& c0, Real& out) {
  if (quad == 0) {
    if (lin == 0) return false;
    out = -c0 / lin;
    return true;
  }
  if (c0 == 0) { out = 0; return true; }
  Real disc = lin * lin - 4 * quad * c0;
  if (disc < 0) return false;
  Real sd = sqrt(disc);
  // stable: q = -(lin + sign(lin)*sd)/2; roots q/quad and c0/q
  Real q = (lin >= 0) ? Real(-(lin + sd) / 2) : Real(-(lin - sd) / 2);
  if (q == 0) { out = 0; return true; }
  Real r1 = q / quad, r2 = c0 / q;
  out = (abs(r1) < abs(r2)) ? r1 : r2;
  return true;
}

// Residual |quad*s^2 + lin*s + c0|, refined by bisection if needed so that
// the reported residual is below tol (or as small as precision allows).
Real refine_root(const Real& quad, const Real& lin, const Real& c0, Real& s,
                 const Real& tol) {
  auto f = [&](const Real& x) { return quad * x * x + lin * x + c0; };
  Real r = abs(f(s));
  if (r <= tol) return r;
  // bracket around s with expanding radius, then bisect
  Real h = (std::max)(Real(abs(s)), Real(1)) * Real("1e-50");
  Real a = s - h, b = s + h;
  int guard = 0;
  while (f(a) * f(b) > 0 && guard++ < 200) { h *= 2; a = s - h; b = s + h; }
  if (f(a) * f(b) > 0) return r;  // cannot bracket; report closed-form residual
  for (int it = 0; it < static_cast<int>(precision_bits()) + 64; ++it) {
    Real m = (a + b) / 2;
    Real fm = f(m);
    if (abs(fm) <= tol || m == a || m == b) { s = m; return abs(fm); }
    if (f(a) * fm <= 0) b = m; else a = m;
  }
  s = (a + b) / 2;
  return abs(f(s));
}

Real witness_norm(const LiouvilleWitness& w) { return sup_norm(w.k); }

}  // namespace

ResonancePair resonant_pair(const FrequencyVector& omega,
                            const std::vector<Integer>& m, const Integer& a,
                            MapVariant map) {
  const int dm1 = omega.d() - 1;
  if (static_cast<int>(m.size()) != dm1)
    throw error("resonant_pair: relation m must have d-1 components");
  ResonancePair pr;
  pr.k.resize(dm1);
  for (int i = 0; i < dm1; ++i) pr.k[i] = a * m[i];
  pr.k[0] += 1;
  auto ot = omega.tilde();
  Real c0 = dot(pr.k, ot);
  Real lin = Real(pr.k[0]);
  Real quad = (map == MapVariant::bar && dm1 >= 2) ? Real(pr.k[1]) : Real(0);
  // exact rational attempt (MPFR values are dyadic, so c0's rounding is the
  // only caveat; for genuinely rational omega' the dot product is exact)
  Rational c0q = to_rational_exact(c0);
  Rational linq = to_rational_exact(lin), quadq = to_rational_exact(quad);
  bool exact_done = false;
  if (quadq == 0) {
    if (linq != 0) {
      pr.s_rational = -c0q / linq;
      exact_done = true;
    }
  } else {
    Rational disc = linq * linq - 4 * quadq * c0q;
    if (disc >= 0) {
      Integer dn = numerator(disc), dd = denominator(disc);
      Integer sn = sqrt(dn), sd = sqrt(dd);
      if (sn * sn == dn && sd * sd == dd) {
        Rational sq(sn, sd);
        Rational r1 = (-linq + sq) / (2 * quadq);
        Rational r2 = (-linq - sq) / (2 * quadq);
        pr.s_rational = (abs(r1) < abs(r2)) ? r1 : r2;
        exact_done = true;
      }
    }
  }
  if (exact_done) {
    pr.exact = true;
    pr.s = Real(pr.s_rational);
    pr.residual_log = neg_inf();
  } else {
    Real s;
    if (!root_nearest_zero(quad, lin, c0, s))
      throw error("resonant_pair: no real root of the resonance equation");
    Real res = refine_root(quad, lin, c0, s, Real("1e-30"));
    pr.s = s;
    pr.residual_log = (res == 0) ? neg_inf() : Real(log(res));
  }
  pr.inner0 = LogAmplitude::from_real(c0);
  return pr;
}

SequenceResult resonance_sequence(const FrequencyVector& omega, MapVariant map,
                                  const SequenceOptions& opt) {
  const int dm1 = omega.d() - 1;
  if (dm1 < 2) throw error("resonance_sequence: need d >= 3");
  SequenceResult out;
  auto ot = omega.tilde();

  auto push_pair = [&](ResonancePair pr) {
    pr.j = static_cast<int>(out.pairs.size()) + 2;
    out.pairs.push_back(std::move(pr));
  };

  auto dir_cond_ok = [&](const Real& nk, const Real& s) {
    if (!opt.tau) return true;
    if (s == 0) return false;
    return nk < pow(abs(s), Real(-1) / (*opt.tau + 1));
  };

  if (map == MapVariant::constant) {
    if (omega.kind != FrequencyVector::Kind::superliouville || omega.witnesses.empty())
      throw error("resonance_sequence: constant-map ladder requires Liouville "
                  "witnesses (construct_superliouville)");
    // sigma(j) = j: pair j binds witness index j (1-based), skipping forward
    // when the growth gap or the steep-inner side condition demands it.
    std::size_t wi = 1;  // 0-based: witness m = 2 for the first pair, j = 2
    Real prev_norm{0};
    while (static_cast<int>(out.pairs.size()) < opt.count &&
           wi < omega.witnesses.size()) {
      const auto& w = omega.witnesses[wi];
      Real nk = witness_norm(w);
      int j = static_cast<int>(out.pairs.size()) + 2;
      if (prev_norm > 0 && nk < opt.growth * prev_norm) { ++wi; continue; }
      if (opt.steep_inner_filter) {
        // |<omega~,k>| <= e^{-j^4 ||k||}
        Real bound = -Real(j) * j * j * j * nk;
        if (!(w.inner.log_mag <= bound)) { ++wi; continue; }
      }
      ResonancePair pr;
      pr.k = w.k;
      pr.s = 0;  // free scale for constant maps
      pr.residual_log = neg_inf();
      pr.inner0 = w.inner;
      push_pair(std::move(pr));
      prev_norm = nk;
      ++wi;
    }
    out.shortfall = static_cast<int>(out.pairs.size()) < opt.count;
    if (out.shortfall) out.note = "witness list exhausted before count";
    return out;
  }

  // hat / bar
  std::vector<Integer> relation = omega.relation;
  if (relation.empty() && omega.kind == FrequencyVector::Kind::generic) {
    // auto-detect a rational dependence of the leading pair of omega'
    BestApprox ba = dirichlet_best({ot[0], ot[1]}, 16);
    if (ba.resonant) {
      relation.assign(static_cast<std::size_t>(dm1), Integer(0));
      relation[0] = ba.k[0];
      relation[1] = ba.k[1];
    }
  }
  if (omega.kind == FrequencyVector::Kind::resonant || !relation.empty()) {
    // resonant branch: k_j = a_j * m + e_1 with a_j growing
    if (relation.empty())
      throw resonance_error("resonance_sequence: resonant kind requires a relation");
    Integer a{2};
    Integer step = Integer((std::max)(Real(2), Real(ceil(opt.growth))));
    Real prev_norm{0}, prev_s = std::numeric_limits<Real>::infinity();
    int guard = 0;
    while (static_cast<int>(out.pairs.size()) < opt.count && guard++ < 1000) {
      ResonancePair pr = resonant_pair(omega, relation, a, map);
      Real nk = sup_norm(pr.k);
      bool ok = (prev_norm == 0 || nk >= opt.growth * prev_norm) &&
                abs(pr.s) < prev_s && dir_cond_ok(nk, pr.s);
      if (ok) {
        prev_norm = nk;
        prev_s = abs(pr.s);
        push_pair(std::move(pr));
      }
      a *= step;
    }
    out.shortfall = static_cast<int>(out.pairs.size()) < opt.count;
    return out;
  }

  // Generic omega': successive best approximations (records) found by the
  // per-k2 scan; for super-Liouville frequencies the witnesses are merged in
  // as candidate records as well (they are the records, but may lie beyond
  // any affordable scan bound).
  struct Cand { std::vector<Integer> k; Real inner; };
  std::vector<Cand> records;
  {
    if (ot[0] == 0) throw error("resonance_sequence: omega_1 must be nonzero");
    Real best = std::numeric_limits<Real>::infinity();
    Real prev_norm{0};
    for (long long k2 = 1; k2 <= opt.scan_limit; ++k2) {
      Real t = -Real(k2) * ot[1] / ot[0];
      Integer n = Integer(round(t));
      Real inner = abs(Real(n) * ot[0] + Real(k2) * ot[1]);
      Integer k1 = n;
      Real nk = (std::max)(Real(abs(Real(k1))), Real(k2));
      if (inner < best && nk > prev_norm) {
        std::vector<long> kl{k1.convert_to<long>(), static_cast<long>(k2)};
        std::vector<Real> o2{ot[0], ot[1]};
        Real err = inner_error_bound(o2, kl);
        if (inner <= err) break;  // resonance floor reached (rational omega')
        Cand c;
        c.k.assign(static_cast<std::size_t>(dm1), Integer(0));
        c.k[0] = k1;
        c.k[1] = k2;
        c.inner = inner;
        records.push_back(std::move(c));
        best = inner;
        prev_norm = nk;
      }
    }
    if (omega.kind == FrequencyVector::Kind::superliouville) {
      for (const auto& w : omega.witnesses) {
        bool dup = false;
        for (const auto& c : records) dup = dup || (c.k == w.k);
        if (!dup) {
          Cand c;
          c.k = w.k;
          c.inner = w.inner.to_real();
          records.push_back(std::move(c));
        }
      }
      std::sort(records.begin(), records.end(), [](const Cand& a, const Cand& b) {
        return sup_norm(a.k) < sup_norm(b.k);
      });
      // keep strictly-improving inner only
      std::vector<Cand> filt;
      Real best2 = std::numeric_limits<Real>::infinity();
      for (auto& c : records)
        if (c.inner < best2) { best2 = c.inner; filt.push_back(std::move(c)); }
      records = std::move(filt);
    }
  }

  Real prev_norm{0}, prev_s = std::numeric_limits<Real>::infinity();
  for (const auto& c : records) {
    if (static_cast<int>(out.pairs.size()) >= opt.count) break;
    Real nk = sup_norm(c.k);
    if (prev_norm > 0 && nk < opt.growth * prev_norm) continue;
    Real c0 = dot(c.k, ot);
    ResonancePair pr;
    pr.k = c.k;
    if (map == MapVariant::hat) {
      if (c.k[0] == 0) continue;
      pr.s = -c0 / Real(c.k[0]);
      Real res = abs(c0 + Real(c.k[0]) * pr.s);
      pr.residual_log = (res == 0) ? neg_inf() : Real(log(res));
    } else {
      Real s;
      if (!root_nearest_zero(Real(c.k[1]), Real(c.k[0]), c0, s)) continue;
      Real res = refine_root(Real(c.k[1]), Real(c.k[0]), c0, s, Real("1e-30"));
      pr.s = s;
      pr.residual_log = (res == 0) ? neg_inf() : Real(log(res));
    }
    if (!(abs(pr.s) < prev_s)) continue;
    if (!dir_cond_ok(nk, pr.s)) continue;
    pr.inner0 = LogAmplitude::from_real(c0);
    prev_norm = nk;
    prev_s = abs(pr.s);
    push_pair(std::move(pr));
  }
  out.shortfall = static_cast<int>(out.pairs.size()) < opt.count;
  if (out.shortfall)
    out.note = "record scan exhausted at ||k_2|| <= " + std::to_string(opt.scan_limit);
  return out;
}

std::vector<ExtensionCandidate> extend_frequency(
    const std::vector<Real>& omega_tilde, const Real& lo, const Real& hi,
    int samples, long K, const Real& tau) {
  if (samples < 1) throw error("extend_frequency: need samples >= 1");
  std::vector<ExtensionCandidate> out;
  for (int i = 0; i < samples; ++i) {
    Real x = (samples == 1) ? Real((lo + hi) / 2)
                            : Real(lo + (hi - lo) * i / (samples - 1));
    std::vector<Real> omega = omega_tilde;
    omega.push_back(x);
    ScanResult sc = box_scan(omega, K, tau);
    if (sc.resonant || sc.undecided) continue;
    out.push_back({x, sc.min_value});
  }
  std::sort(out.begin(), out.end(), [](const ExtensionCandidate& a,
                                       const ExtensionCandidate& b) {
    if (a.gamma != b.gamma) return a.gamma > b.gamma;
    return a.omega_d < b.omega_d;
  });
  return out;
}

}  // namespace qpt
