#pragma once

#include <optional>
#include <vector>

#include "qpt/log_amplitude.hpp"
#include "qpt/real.hpp"

namespace qpt {

// How the parameterized frequency map depends on s (the last action).
enum class MapVariant { hat, bar, constant };

// A witness of Liouville-quality rational approximation:
// k = (-p, q, 0, ..., 0) in Z^{d-1} with <omega~, k> tiny and nonzero.
struct LiouvilleWitness {
  std::vector<Integer> k;    // d-1 components
  LogAmplitude inner;        // <omega~, k>, held in the log domain (exact sign)
  Real ratio;                // ln|inner| / ||k||  (Liouville quality)
  bool exact_checked = false;  // cross-checked against exact rationals
};

// A frequency vector omega in R^d, optionally carrying provenance that later
// stages exploit (Liouville witnesses for constant-map families, or a
// resonance relation for the resonant branch).
struct FrequencyVector {
  std::vector<Real> omega;  // d components
  enum class Kind { generic, superliouville, resonant } kind = Kind::generic;
  std::vector<LiouvilleWitness> witnesses;   // superliouville only
  std::vector<Integer> relation;             // resonant only: m with <m,omega'> = 0
  std::vector<long long> tower_exponents;    // superliouville only

  int d() const { return static_cast<int>(omega.size()); }
  std::vector<Real> tilde() const {  // first d-1 components
    return std::vector<Real>(omega.begin(), omega.end() - 1);
  }
};

struct DiophantineResult {
  bool pass = false;
  Real min_value{0};          // min over box of |<omega,k>| * ||k||^tau
  std::vector<Integer> worst_k;
  bool resonant = false;      // an exact (to precision) resonance was found
};

// Exhaustive scan of 0 < ||k||_sup <= K (k and -k identified; canonical sign
// has the first nonzero component positive).  Certified: if rounding error
// could flip the pass/fail comparison, raises precision_error.
DiophantineResult diophantine_check(const std::vector<Real>& omega, long K,
                                    const Real& tau, const Real& gamma);

// Build omega = (1, alpha, sqrt(3), sqrt(5), ...) in R^d where
// alpha = sum_m 2^{-a_m} over the tower a_1 = 2, a_{m+1} = m * 2^{a_m}
// (or a caller-provided exponent list).  alpha carries depth+2 terms and the
// returned witnesses are m = 1..depth+1.  Witness inner products are computed
// symbolically from the exponent list (exact in the log domain) and
// cross-checked with exact rationals whenever the denominators fit.
FrequencyVector construct_superliouville(int d, int depth,
                                         std::vector<long long> exponents = {});

struct BestApprox {
  std::vector<Integer> k;  // 2 components
  Real value{0};           // |<omega', k>|
  bool resonant = false;
};

// Smallest |<omega', k>| over 0 < ||k|| <= K for a 2-component omega'.
// Exhaustive over the box; ties broken by smaller ||k||, then lexicographic.
BestApprox dirichlet_best(const std::vector<Real>& omega2, long long K);

// One resonance of the parameterized frequency map: at s = s_j the first
// d-1 frequencies satisfy <omega~(s_j), k_j> = 0 (hat/bar variants), or the
// pair was selected from Liouville witnesses (constant variant, s free).
struct ResonancePair {
  int j = 2;                    // index in the family (first coupled term is j=2)
  std::vector<Integer> k;       // d-1 components
  Real s{0};                    // resonant parameter (0 for constant variant)
  Real residual_log{0};         // ln |<omega~(s), k>| after refinement; -inf -> exact
  bool exact = false;           // s is exactly rational
  Rational s_rational{0};       // valid when exact
  LogAmplitude inner0;          // <omega~(0), k> = <omega', k'>, log domain
};

struct SequenceOptions {
  int count = 3;                 // pairs requested (j = 2 .. count+1)
  Real growth{1};                // enforce ||k_{j+1}|| >= growth * ||k_j||
  std::optional<Real> tau;       // if set, enforce ||k_j|| < |s_j|^{-1/(tau+1)}
  long long scan_limit = 1 << 20;  // record scan bound on the second component
  // constant variant, schedules iii/iv: require |<omega~,k_j>| <= e^{-j^4 ||k_j||}
  bool steep_inner_filter = false;
};

struct SequenceResult {
  std::vector<ResonancePair> pairs;
  bool shortfall = false;   // fewer pairs than requested within the scan bound
  std::string note;
};

// Construct the resonance ladder for a frequency vector under a map variant.
//  hat: s_j = -<omega',k_j>/k_{j,1} from successive best approximations;
//  bar: s_j = root of k_2 s^2 + k_1 s + <omega',k'> nearest 0;
//  resonant omega' (relation m): k_j = (a m_1 + 1, a m_2, 0, ...) and the
//    near-zero root of <omega~(s),k> = 0 (exact rationals when the
//    discriminant is a perfect square);
//  constant: pairs bind witnesses sigma(j) = j (s left free).
SequenceResult resonance_sequence(const FrequencyVector& omega, MapVariant map,
                                  const SequenceOptions& opt);

// The resonant-branch pair for an explicitly given multiplier a.
ResonancePair resonant_pair(const FrequencyVector& omega,
                            const std::vector<Integer>& m, const Integer& a,
                            MapVariant map);

struct ExtensionCandidate {
  Real omega_d{0};
  Real gamma{0};  // largest gamma' for which the full vector passes at (K, tau)
};

// Sample omega_d over [lo, hi] and keep candidates for which
// (omega~, omega_d) is Diophantine at (K, tau); sorted by gamma descending.
std::vector<ExtensionCandidate> extend_frequency(
    const std::vector<Real>& omega_tilde, const Real& lo, const Real& hi,
    int samples, long K, const Real& tau);

}  // namespace qpt
