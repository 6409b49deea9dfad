// Frequency arithmetic: Diophantine scans, best approximations, the
// super-Liouville tower, and resonance ladders.  Oracles are continued
// fraction convergents and exact rational arithmetic.

#include <doctest.h>

#include "qpt/arithmetic.hpp"
#include "qpt/rng.hpp"

using namespace qpt;

namespace {
Real sqrt2() { return sqrt(Real(2)); }
Real sqrt3() { return sqrt(Real(3)); }
}  // namespace

TEST_CASE("dirichlet_best finds the continued-fraction convergents of sqrt(2)") {
  // Convergents of sqrt(2): 1, 3/2, 7/5, 17/12, 41/29.
  std::vector<Real> o{Real(1), sqrt2()};
  auto b10 = dirichlet_best(o, 10);
  CHECK(abs(b10.k[0]) == 7);
  CHECK(abs(b10.k[1]) == 5);
  CHECK(abs(b10.value - abs(7 - 5 * sqrt2())) < Real("1e-70"));
  CHECK(!b10.resonant);

  auto b29 = dirichlet_best(o, 100);
  CHECK(abs(b29.k[0]) == 99);  // 99/70 is the convergent after 41/29
  CHECK(abs(b29.k[1]) == 70);

  // Large-box branch agrees with the exhaustive one.
  auto be = dirichlet_best(o, 4096);
  auto bl = dirichlet_best(o, 5000);
  CHECK(bl.value <= be.value);
}

TEST_CASE("dirichlet_best golden ratio") {
  std::vector<Real> o{Real(1), (1 + sqrt(Real(5))) / 2};
  auto b = dirichlet_best(o, 8);
  // Fibonacci convergent 8/5: |8 - 5 phi| is the record in the box.
  CHECK(abs(b.k[0]) == 8);
  CHECK(abs(b.k[1]) == 5);
}

TEST_CASE("dirichlet_best flags exact rational resonance") {
  std::vector<Real> o{Real(2), Real(-3)};
  auto b = dirichlet_best(o, 5);
  CHECK(b.resonant);
  CHECK(b.value <= Real("1e-70"));
  CHECK(abs(b.k[0]) == 3);
  CHECK(abs(b.k[1]) == 2);
}

TEST_CASE("diophantine_check on (1, sqrt2, sqrt3)") {
  std::vector<Real> o{Real(1), sqrt2(), sqrt3()};
  Real tau(2);
  // Oracle: the minimizer in the K=7 box is +-(7,-5,0) (the sqrt2
  // convergent); value |7-5 sqrt2| * 7^2.
  auto r = diophantine_check(o, 7, tau, Real(0));
  CHECK(r.pass);
  Real expect = abs(7 - 5 * sqrt2()) * 49;
  CHECK(abs(r.min_value - expect) < Real("1e-65"));
  CHECK(abs(r.worst_k[0]) == 7);
  CHECK(abs(r.worst_k[1]) == 5);
  CHECK(r.worst_k[2] == 0);
  CHECK(!r.resonant);

  // gamma above the minimum: certified fail
  auto r2 = diophantine_check(o, 7, tau, expect * 2);
  CHECK(!r2.pass);
}

TEST_CASE("diophantine_check detects resonance and reports value 0") {
  std::vector<Real> o{Real(1), Real(1), Real(1)};
  auto r = diophantine_check(o, 3, Real(2), Real("0.5"));
  CHECK(r.resonant);
  CHECK(!r.pass);
  CHECK(r.min_value == 0);
  // the reported worst_k is a genuine resonance
  Real ip{0};
  for (std::size_t i = 0; i < o.size(); ++i) ip += o[i] * Real(r.worst_k[i]);
  CHECK(abs(ip) < Real("1e-70"));
}

TEST_CASE("diophantine_check straddling comparison raises precision_error") {
  std::vector<Real> o{Real(1), sqrt2()};
  auto r = diophantine_check(o, 3, Real(0), Real(0));
  // gamma exactly at the achieved minimum: the comparison cannot be certified
  CHECK_THROWS_AS(diophantine_check(o, 3, Real(0), r.min_value),
                  precision_error);
}

TEST_CASE("construct_superliouville default tower, depth 2") {
  auto fv = construct_superliouville(3, 2);
  REQUIRE(fv.d() == 3);
  REQUIRE(fv.tower_exponents.size() == 4);
  CHECK(fv.tower_exponents[0] == 2);
  CHECK(fv.tower_exponents[1] == 4);
  CHECK(fv.tower_exponents[2] == 32);
  CHECK(fv.tower_exponents[3] == 3ll * (1ll << 32));
  REQUIRE(fv.witnesses.size() == 3);

  // witness m=1: k = (-1, 4), inner = 2^-2 + 2^-30 + ...
  CHECK(fv.witnesses[0].k[0] == -1);
  CHECK(fv.witnesses[0].k[1] == 4);
  Real inner1 = fv.witnesses[0].inner.to_real();
  CHECK(abs(inner1 - (pow(Real(2), -2) + pow(Real(2), -30))) < Real("1e-60"));
  CHECK(fv.witnesses[0].exact_checked);

  // witness m=2: k = (-5, 16), inner = 2^-28 (1 + eps)
  CHECK(fv.witnesses[1].k[0] == -5);
  CHECK(fv.witnesses[1].k[1] == 16);
  CHECK(abs(fv.witnesses[1].inner.log_mag + 28 * log(Real(2))) < Real("1e-6"));

  // witness m=3: k = (-(2^30+2^28+1), 2^32); inner symbolic only
  Integer p3 = (Integer(1) << 30) + (Integer(1) << 28) + 1;
  CHECK(fv.witnesses[2].k[0] == -p3);
  CHECK(fv.witnesses[2].k[1] == (Integer(1) << 32));
  Real expect_log = (Real(32) - Real(3) * pow(Real(2), 32)) * log(Real(2));
  CHECK(abs(fv.witnesses[2].inner.log_mag - expect_log) < Real("1e-3"));
  // this inner product is invisible to numeric evaluation of <omega, k>:
  Real numeric = Real(fv.witnesses[2].k[1]) * fv.omega[1] + Real(fv.witnesses[2].k[0]);
  CHECK(numeric == 0);  // symbolic bookkeeping is the only way to keep it

  // Liouville quality ratios strictly decrease
  CHECK(fv.witnesses[1].ratio < fv.witnesses[0].ratio);
  CHECK(fv.witnesses[2].ratio < fv.witnesses[1].ratio);
}

TEST_CASE("construct_superliouville custom exponent towers") {
  auto fv = construct_superliouville(3, 2, {2, 12, 28, 60});
  REQUIRE(fv.witnesses.size() == 3);
  CHECK(fv.witnesses[0].k[1] == 4);
  CHECK(fv.witnesses[1].k[1] == 4096);
  CHECK(fv.witnesses[2].k[1] == (Integer(1) << 28));
  for (const auto& w : fv.witnesses) CHECK(w.exact_checked);

  CHECK_THROWS_AS(construct_superliouville(3, 0), resonance_error);
  CHECK_THROWS_AS(construct_superliouville(3, 5), capacity_error);
  CHECK_THROWS_AS(construct_superliouville(3, 2, {5, 4, 3, 2}), error);
}

TEST_CASE("resonance_sequence hat (1, sqrt2, sqrt3): records and s values") {
  FrequencyVector fv;
  fv.omega = {Real(1), sqrt2(), sqrt3()};
  SequenceOptions so;
  so.count = 3;
  so.scan_limit = 64;
  auto sr = resonance_sequence(fv, MapVariant::hat, so);
  REQUIRE(sr.pairs.size() == 3);
  CHECK(sr.pairs[0].k[0] == -1);
  CHECK(sr.pairs[0].k[1] == 1);
  CHECK(sr.pairs[1].k[0] == -3);
  CHECK(sr.pairs[1].k[1] == 2);
  CHECK(sr.pairs[2].k[0] == -7);
  CHECK(sr.pairs[2].k[1] == 5);
  // s for (-7,5): (5 sqrt2 - 7)/7
  Real s_expect = (5 * sqrt2() - 7) / 7;
  CHECK(abs(sr.pairs[2].s - s_expect) < Real("1e-70"));
  // hat resonance identity: (1+s)(-7) + 5 sqrt2 = 0
  Real resid = (1 + sr.pairs[2].s) * (-7) + 5 * sqrt2();
  CHECK(abs(resid) < Real("1e-60"));
  // |s_j| strictly decreasing
  CHECK(abs(sr.pairs[1].s) < abs(sr.pairs[0].s));
  CHECK(abs(sr.pairs[2].s) < abs(sr.pairs[1].s));
}

TEST_CASE("resonance_sequence bar (1, sqrt2, sqrt3): quadratic root") {
  FrequencyVector fv;
  fv.omega = {Real(1), sqrt2(), sqrt3()};
  SequenceOptions so;
  so.count = 3;
  so.scan_limit = 64;
  auto sr = resonance_sequence(fv, MapVariant::bar, so);
  REQUIRE(sr.pairs.size() == 3);
  const auto& p = sr.pairs[2];
  CHECK(p.k[0] == -7);
  CHECK(p.k[1] == 5);
  // 5 s^2 - 7 s + (5 sqrt2 - 7) = 0 at the root nearest zero
  Real resid = 5 * p.s * p.s - 7 * p.s + (5 * sqrt2() - 7);
  CHECK(abs(resid) < Real("1e-30"));
  CHECK(abs(p.s) < Real("0.011"));
  CHECK(abs(p.s) > Real("0.010"));
}

TEST_CASE("resonant branch returns exact rational roots") {
  // omega' = (1, -1, sqrt3), relation m = (1, 1): k = (9 m1 + 1, 9 m2) = (10, 9)
  FrequencyVector fv;
  fv.omega = {Real(1), Real(-1), sqrt3()};
  fv.kind = FrequencyVector::Kind::resonant;
  fv.relation = {Integer(1), Integer(1)};
  // hat: <(1+s, -1), (10, 9)> = 10 s + 1 = 0
  auto pr = resonant_pair(fv, fv.relation, Integer(9), MapVariant::hat);
  CHECK(pr.k[0] == 10);
  CHECK(pr.k[1] == 9);
  REQUIRE(pr.exact);
  CHECK(pr.s_rational == Rational(-1, 10));
  CHECK(pr.s == Real(Rational(-1, 10)));

  // bar: 9 s^2 + 10 s + 1 = (9 s + 1)(s + 1); root nearest zero is -1/9
  auto pb = resonant_pair(fv, fv.relation, Integer(9), MapVariant::bar);
  REQUIRE(pb.exact);
  CHECK(pb.s_rational == Rational(-1, 9));
}

TEST_CASE("resonance_sequence auto-detects rational dependence") {
  FrequencyVector fv;
  fv.omega = {Real(1), Real(-1), sqrt3()};
  SequenceOptions so;
  so.count = 2;
  auto sr = resonance_sequence(fv, MapVariant::hat, so);
  REQUIRE(sr.pairs.size() == 2);
  for (const auto& p : sr.pairs) {
    CHECK(p.exact);
    // <omega~(s), k> = 0 exactly: (1+s) k1 - k2 = 0
    Rational lhs = (1 + p.s_rational) * Rational(p.k[0]) - Rational(p.k[1]);
    CHECK(lhs == 0);
  }
  CHECK(sup_norm(sr.pairs[1].k) > sup_norm(sr.pairs[0].k));
}

TEST_CASE("resonance_sequence constant map binds witnesses sigma(j) = j") {
  auto fv = construct_superliouville(3, 2);
  SequenceOptions so;
  so.count = 2;
  auto sr = resonance_sequence(fv, MapVariant::constant, so);
  REQUIRE(sr.pairs.size() == 2);
  // pair j=2 is witness m=2: (-5, 16)
  CHECK(sr.pairs[0].j == 2);
  CHECK(sr.pairs[0].k[0] == -5);
  CHECK(sr.pairs[0].k[1] == 16);
  CHECK(sr.pairs[1].k[1] == (Integer(1) << 32));
  // symbolic inner survives
  CHECK(abs(sr.pairs[0].inner0.log_mag + 28 * log(Real(2))) < Real("1e-6"));
}

TEST_CASE("steep inner filter rejects shallow witnesses") {
  // tower (2, 4, 400, 1200): witness m=2 has ||k|| = 16 and
  // |inner| ~ 2^{4-400} = e^{-274.5} <= e^{-16*16}, so it passes the
  // |inner| <= e^{-j^4 ||k||} filter at j=2; witnesses m=1 and m=3 fail.
  auto fv = construct_superliouville(3, 2, {2, 4, 400, 1200});
  SequenceOptions so;
  so.count = 2;
  so.steep_inner_filter = true;
  auto sr = resonance_sequence(fv, MapVariant::constant, so);
  CHECK(sr.shortfall);
  REQUIRE(sr.pairs.size() == 1);
  CHECK(sr.pairs[0].k[1] == 16);

  // without the filter both remaining witnesses bind
  so.steep_inner_filter = false;
  auto sr2 = resonance_sequence(fv, MapVariant::constant, so);
  CHECK(sr2.pairs.size() == 2);
}

TEST_CASE("eq_dir2 direction condition filters pairs") {
  FrequencyVector fv;
  fv.omega = {Real(1), sqrt2(), sqrt3()};
  SequenceOptions so;
  so.count = 3;
  so.scan_limit = 64;
  so.tau = Real(1);
  auto sr = resonance_sequence(fv, MapVariant::hat, so);
  for (const auto& p : sr.pairs) {
    CHECK(sup_norm(p.k) < pow(abs(p.s), Real(-1) / 2));
  }
}

TEST_CASE("extend_frequency returns Diophantine candidates sorted by gamma") {
  std::vector<Real> ot{Real(1), sqrt2()};
  auto cands = extend_frequency(ot, Real(1), Real(2), 9, 5, Real(2));
  REQUIRE(!cands.empty());
  for (std::size_t i = 1; i < cands.size(); ++i)
    CHECK(cands[i - 1].gamma >= cands[i].gamma);
  // every candidate really passes at its gamma (property re-check)
  for (const auto& c : cands) {
    std::vector<Real> o = ot;
    o.push_back(c.omega_d);
    auto r = diophantine_check(o, 5, Real(2), c.gamma / 2);
    CHECK(r.pass);
  }
}

TEST_CASE("property: random integer combinations never beat the scan minimum") {
  std::vector<Real> o{Real(1), sqrt2(), sqrt3()};
  Real tau(2);
  auto r = diophantine_check(o, 5, tau, Real(0));
  CounterRng rng(7);
  for (int it = 0; it < 200; ++it) {
    std::vector<long> k(3);
    bool zero = true;
    for (auto& v : k) {
      v = rng.uniform_int(-5, 5);
      zero = zero && v == 0;
    }
    if (zero) continue;
    Real ip{0}, nk{0};
    for (int i = 0; i < 3; ++i) {
      ip += o[i] * k[i];
      nk = (std::max)(nk, Real(std::abs(k[i])));
    }
    CHECK(abs(ip) * pow(nk, tau) >= r.min_value * (1 - Real("1e-70")));
  }
}
