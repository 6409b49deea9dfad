#pragma once

#include <stdexcept>
#include <string>

namespace qpt {

// Base class for all errors raised by the laboratory.  Exit-code policy for
// the CLI: usage/parse problems -> 2, precision/capacity -> 3, a check that
// ran to completion but certified failure -> 1.
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Working precision cannot decide a comparison, or a requested computation
// needs more bits than configured.
struct precision_error : error {
  explicit precision_error(const std::string& msg) : error(msg) {}
};

// A requested object is not representable at any precision on this machine
// (e.g. tower exponents beyond the floating-point exponent range).
struct capacity_error : error {
  explicit capacity_error(const std::string& msg) : error(msg) {}
};

// A frequency vector is rationally dependent where independence is required,
// or a denominator in a canonical transformation is resonant.
struct resonance_error : error {
  explicit resonance_error(const std::string& msg) : error(msg) {}
};

// An operation is undefined for the requested coupling-schedule variant.
struct variant_error : error {
  explicit variant_error(const std::string& msg) : error(msg) {}
};

// A bound or series that must decrease fails to do so.
struct divergence_error : error {
  explicit divergence_error(const std::string& msg) : error(msg) {}
};

}  // namespace qpt
