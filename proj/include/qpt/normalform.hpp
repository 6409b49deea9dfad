#pragma once

#include <string>
#include <vector>

#include "qpt/hamiltonian.hpp"

namespace qpt {

// Canonical change of variables that removes the trigonometric terms of the
// family up to order n.  forward is the explicit displayed system
//   Theta~ = theta~,  R_d = s,
//   R~     = r~ + sum_j k_j b_j(s)^{-1} phi_j(s) sin(2 pi <k_j, theta~>),
//   Theta_d = theta_d + (1/2pi) sum_j d/ds[b_j^{-1} phi_j] cos(2 pi <k_j, theta~>);
// inverse negates the corrections (exact: corrections depend only on
// (theta~, s), which both directions fix).  inverse conjugates H_n to the
// integrable H_0(R) = <omega(R_d), R>: H_0(inverse(z)) == H_n(z) identically.
struct CanonicalMap {
  const HamiltonianFamily* fam = nullptr;
  int n = 1;  // use terms j = 2..n (n = 1 is the identity)

  PhaseState forward(const PhaseState& z) const;
  PhaseState inverse(const PhaseState& z) const;
};

// phi_j(s) / b_j(s) and its s-derivative.  For schedules whose phi_j carries
// the factor <omega~, k_j> (v, vi, vii, constant map) the denominator cancels
// symbolically; otherwise the denominator is checked against the family's
// residual tolerance (resonance_error near s = s_j).
Real phi_over_b(const HamiltonianFamily& F, int j, const Real& s);
Real dphi_over_b(const HamiltonianFamily& F, int j, const Real& s);

struct ConjugacyReport {
  Real max_residual{0};
  PhaseState worst;
  int checked = 0;
  std::vector<std::string> point_errors;  // resonant denominators, per point
  bool pass = false;
};

// residual_i = |H_n(z_i) - <omega(R_d), R> at inverse(z_i)|; pass iff the
// max over non-erroring points is <= tol.
ConjugacyReport verify_conjugacy(const HamiltonianFamily& F, int n,
                                 const std::vector<PhaseState>& points,
                                 const Real& tol);

struct TrigTerm {
  std::vector<Integer> k;
  LogAmplitude coeff;
};

// Finite cosine sum  sum_i c_i cos(2 pi <k_i, theta~>).
struct TrigPolynomial {
  std::vector<TrigTerm> terms;
  Real eval(const std::vector<Real>& theta_tilde) const;
  // gradient in theta~ of the cosine sum
  std::vector<Real> grad(const std::vector<Real>& theta_tilde) const;
};

// Coefficient of s^p in (1/2pi) sum_j [phi_j / b_j](s) cos(2 pi <k_j, .>),
// the order-p piece of the formal conjugacy.  Obtained by truncated power
// series expansion (series inversion of b_j for the s-dependent maps).
// Schedule iv has no such expansion and fails with variant_error.
TrigPolynomial bnf_coefficient(const HamiltonianFamily& F, int p);

// Log-log slope of |H_n(Theta, r + grad f_P) - <omega(s), r>| against s over
// shrinking s, where f_P = -sum_{p<=P} s^p T_p.  Expected >= P+1 when the
// order-P truncation is correct.  Returns +infinity when the residual
// vanishes identically (n = 1).
Real bnf_remainder_order(const HamiltonianFamily& F, int n, int P);

struct ProbeValue {
  int n;
  Real value;
  Real error_estimate;  // Richardson comparison of steps h and h/2
};

// m-th directional finite-difference derivative (direction: angle coordinate
// `dir`) of the R~ component `comp` of the order-n forward map, for each
// n in [n_lo, n_hi].  Steps are chosen from the precision budget as
// eps^{1/(m+2)}; each value carries a Richardson error estimate.  The
// sequence converges in n for derivative orders the limit map supports and
// diverges beyond them.
std::vector<ProbeValue> regularity_probe(const HamiltonianFamily& F, int m,
                                         const PhaseState& probe, int n_lo,
                                         int n_hi, int dir = 0, int comp = 0);

}  // namespace qpt
