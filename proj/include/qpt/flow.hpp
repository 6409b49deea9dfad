#pragma once

#include <string>
#include <vector>

#include "qpt/hamiltonian.hpp"

namespace qpt {

// The flow of H_n is integrable in closed form: s = r_d is a first integral,
// the first d-1 angles rotate rigidly with omega~(s), so every trigonometric
// phase <k_j, theta~(t)> is affine in t and the remaining equations reduce to
// quadratures.  exact_flow evaluates those quadratures directly; it is valid
// for arbitrary t (phases are reduced mod 1 at extended precision) and serves
// as the reference against which the numeric integrator is checked.
PhaseState exact_flow(const HamiltonianFamily& F, const PhaseState& z0,
                      const Real& t);

// Per-term action kick G(t) = int_0^t 2 pi cos(2 pi (a + b u)) du, with the
// same secular / Taylor-corridor / closed-form branches exact_flow uses.
// Shared with the secular-vs-bounded decomposition of the drift.
Real action_kick(const Real& a, const Real& b, const Real& t,
                 const Real& secular_tol);

struct NumericOptions {
  Real rtol{Real("1e-24")};
  Real atol{Real("1e-28")};
  long max_steps = 2000000;
  Real initial_step{Real("1e-3")};
};

// Adaptive Dormand-Prince 5(4) integration of the full vector field.
PhaseState numeric_flow(const HamiltonianFamily& F, const PhaseState& z0,
                        const Real& t, const NumericOptions& opt = {});

struct Trajectory {
  std::vector<Real> times;
  std::vector<PhaseState> states;
  std::vector<Real> energies;
  std::string method;  // "exact" or "dopri5"
};

Trajectory sample_trajectory(const HamiltonianFamily& F, const PhaseState& z0,
                             const Real& t_end, int samples, bool exact = true,
                             const NumericOptions& opt = {});

// Sound sup-norm Lipschitz bound for the vector field on the box
// { ||theta|| arbitrary, ||r~|| <= R, |s| <= Delta }.
Real lipschitz_bound(const HamiltonianFamily& F, const Real& Delta,
                     const Real& R);

// Gronwall: two flows whose fields differ by delta in C^0 stay within
// delta (e^{LT}-1)/L over [0, T].
Real gronwall_bound(const Real& delta, const Real& L, const Real& T);

}  // namespace qpt
