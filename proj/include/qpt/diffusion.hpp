#pragma once

#include <string>
#include <vector>

#include "qpt/flow.hpp"
#include "qpt/hamiltonian.hpp"

namespace qpt {

// Unstable-orbit conditions checked on truncations:
//   P1: exists z, ||z|| <= 1/n, t > 0 with ||Phi^t(z)|| > n          (schedule i)
//   P2: ... with t <= exp(C ||z||^{-1/(tau+1)}), ||Phi^t(z)|| > 1/||z|| (ii)
//   P3: t <= ||z||^{-2n}, escape beyond 1/||z||                      (iii)
//   P4: t <= ||z||^{-4},  escape beyond 1/||z||                      (iv)
//   P5: every z in Q_n+ = T^d x [-n,n]^{d-1} x [1/n, n] escapes past n (v)
//   P6: same over Q_n (s in [-n,-1/n] u [1/n,n])                     (vii)
struct PropertyId {
  int index = 1;  // 1..6
  int n = 2;
  Real C{1};    // P2 only
  Real tau{1};  // P2 only
};

struct DiffusionReport {
  PropertyId property;
  PhaseState witness;
  LogAmplitude escape_time;       // witnessed t (log domain for huge scales)
  Real threshold_reached{0};      // sup-norm distance attained
  Real margin{0};                 // threshold_reached / required distance
  LogAmplitude persistence_delta; // C^1 closeness under which the property
                                  // survives perturbation (Gronwall)
  bool pass = false;
  bool grid_only = false;  // universal quantifier verified on a grid only
  std::string note;
};

// The parameter value s_n the predicates bind: the resonance value stored
// with pair n for the s-dependent maps, e^{-n^2 ||k_n||} for schedules
// iii/iv, and a box representative for v/vi/vii.
Real bound_s(const HamiltonianFamily& F, int n);

// theta = 0, r = (0,...,0,s_n); schedules v/vii instead sample their box
// (Q_n+ resp. Q_n) with the seeded counter generator.
PhaseState canonical_initial_condition(const HamiltonianFamily& F, int n,
                                       std::uint64_t seed = 0);

// r~(t) - r~(0) = A(t) + B(t) at the canonical initial condition: A is the
// j = n term (secular or near-secular), B the bounded sum over j < n.
struct ABDecomposition {
  std::vector<Real> A, B;  // d-1 components each
  Real bound_B{0};         // sum_{j<n} 2 ||k_j|| |phi_j| / |b_j|
};
ABDecomposition decompose_AB(const HamiltonianFamily& F, int n, const Real& t);

enum class EscapeStrategy { closed_form_root, bisection_on_exact_flow, numeric_fallback };

// Least t <= t_max found with ||r(t)|| >= target (sup norm), by the chosen
// strategy; closed_form_root inverts the secular slope and verifies with
// exact_flow.  A failing report carries the max distance attained.
DiffusionReport escape_time(const HamiltonianFamily& F, int n,
                            const PhaseState& z, const Real& target,
                            const Real& t_max, EscapeStrategy strategy);

// Instantiates the predicate and returns a passing witness or a failing
// report.  grid_per_dim controls the P5/P6 grids.
DiffusionReport check_property(const HamiltonianFamily& F, int n,
                               const PropertyId& prop, int grid_per_dim = 3);

// Closed-form prediction of the escape time to the given distance
// (schedules i-iv only; v-vii have no secular structure).
LogAmplitude predicted_escape_time(const HamiltonianFamily& F, int n,
                                   const Real& target);

}  // namespace qpt
