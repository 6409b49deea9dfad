#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpt/arithmetic.hpp"
#include "qpt/log_amplitude.hpp"

namespace qpt {

// The seven coupling schedules phi_j(s) attached to the trigonometric terms.
// Parameters: C (width, schedule ii), l (regularity order, schedule vi).
//   i  : s^j e^{-j||k_j||}            (hat/bar maps)
//   ii : s^j e^{-(C/2)||k_j||}        (hat map)
//   iii: s^j e^{-j||k_j||}            (constant map)
//   iv : s^2 e^{-j||k_j||}            (constant map)
//   v  : <w~,k_j> s^j e^{||k_j|| s}         (constant map)
//   vi : <w~,k_j> s^j ||k_j||^{-l-1} j^{-2} (constant map)
//   vii: <w~,k_j> s^j e^{||k_j|| s^2}       (constant map)
enum class ScheduleVariant { i, ii, iii, iv, v, vi, vii };

std::string to_string(ScheduleVariant v);
ScheduleVariant schedule_from_string(const std::string& s);
std::string to_string(MapVariant m);
MapVariant map_from_string(const std::string& s);

// omega(s): the s-dependent frequency vector (s = last action coordinate).
struct FrequencyMap {
  MapVariant kind = MapVariant::hat;
  std::vector<Real> omega0;  // omega(0), d components

  int d() const { return static_cast<int>(omega0.size()); }
  std::vector<Real> eval(const Real& s) const;   // omega(s)
  std::vector<Real> d1(const Real& s) const;     // d omega / ds
  std::vector<Real> d2(const Real& s) const;     // d^2 omega / ds^2
  // <omega~(s) - omega~(0), k>: the s-dependent part of the denominator,
  // computed without touching the (possibly symbolically known) base inner
  // product.
  Real inner_shift(const std::vector<Integer>& k, const Real& s) const;
};

// A truncated family H_n = <omega(s), r> - sum_{j=2..n} phi_j(s) sin(2 pi <k_j, theta~>).
struct HamiltonianFamily {
  FrequencyMap map;
  ScheduleVariant variant = ScheduleVariant::i;
  Real C{1};                       // schedule ii
  long l = 2;                      // schedule vi
  std::vector<ResonancePair> pairs;  // indices j = 2 .. n
  Real residual_tol{Real("1e-30")};

  int d() const { return map.d(); }
  int n() const { return static_cast<int>(pairs.size()) + 1; }
  const ResonancePair& pair(int j) const { return pairs.at(j - 2); }

  Real norm_k(int j) const { return sup_norm(pair(j).k); }

  // phi_j(s), log domain (exact sign).
  LogAmplitude phi_log(int j, const Real& s) const;
  Real phi(int j, const Real& s) const { return phi_log(j, s).to_real(); }
  Real dphi(int j, const Real& s) const;   // d phi_j / ds
  Real d2phi(int j, const Real& s) const;  // d^2 phi_j / ds^2

  // sup_{|s| <= S} |phi_j|, |phi_j'|, |phi_j''| (log domain, sound bounds).
  LogAmplitude phi_sup_log(int j, const Real& S) const;
  Real dphi_sup(int j, const Real& S) const;
  Real d2phi_sup(int j, const Real& S) const;

  // Denominator b_j(s) = <omega~(s), k_j>.
  Real b(int j, const Real& s) const;
  Real db(int j, const Real& s) const;  // d b_j / ds
};

struct PhaseState {
  std::vector<Real> theta;  // d angles (mod 1)
  std::vector<Real> r;      // d actions; r[d-1] = s
};

Real eval_H(const HamiltonianFamily& F, const PhaseState& z);

// (theta_dot (d), r_dot (d)); r_dot[d-1] is structurally zero.
struct FieldValue {
  std::vector<Real> theta_dot;
  std::vector<Real> r_dot;
};
FieldValue vector_field(const HamiltonianFamily& F, const PhaseState& z);

// Sound upper bound, in the log domain, for the analytic tail
//   sum_{j=from+1..to} sup_{|Im theta|<=rho, |s|<=Delta+rho} |phi_j sin(2 pi <k_j,.>)|.
// to = nullopt means the infinite tail: norms are extrapolated geometrically
// from the last built pairs and the summand must decrease (divergence_error
// otherwise).
LogAmplitude tail_bound(const HamiltonianFamily& F, int from,
                        std::optional<int> to, const Real& Delta,
                        const Real& rho, const Real& growth_hint = Real(0));

struct NextTermBudget {
  Real Delta{1};      // parameter box |s| <= Delta on which closeness is measured
  Real T{1};          // time horizon
  Real L{1};          // Lipschitz bound of the current field on the box
  Real delta_req{0};  // required C^0 closeness of flows at time T
};

struct NextTermChoice {
  bool found = false;
  ResonancePair pair;        // the accepted candidate (j set to n+1)
  Real field_delta{0};       // C^0 bound on the added field term
  Real flow_divergence{0};   // Gronwall bound delta (e^{LT}-1)/L
  std::string note;
};

// Pick the smallest-norm candidate whose added term keeps the time-T flow
// within delta_req of the current one (Gronwall).  Candidates are tried in
// order of increasing ||k||.
NextTermChoice choose_next_k(const HamiltonianFamily& F,
                             std::vector<ResonancePair> candidates,
                             const NextTermBudget& budget);

}  // namespace qpt
