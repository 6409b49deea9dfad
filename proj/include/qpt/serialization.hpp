#pragma once

#include <string>

#include <json.hpp>

#include "qpt/arithmetic.hpp"
#include "qpt/diffusion.hpp"
#include "qpt/flow.hpp"
#include "qpt/hamiltonian.hpp"
#include "qpt/normalform.hpp"

namespace qpt {

// All reals are serialized as decimal strings (round-trippable at the
// working precision); integers as decimal strings (arbitrary size); log
// amplitudes as {sign, log_mag}.

nlohmann::json to_json(const LogAmplitude& a);
LogAmplitude log_amplitude_from_json(const nlohmann::json& j);

// Schema "family-v1": map kind, omega(0), schedule parameters, pairs.
nlohmann::json family_to_json(const HamiltonianFamily& F);
HamiltonianFamily family_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const DiffusionReport& r);
nlohmann::json report_to_json(const ConjugacyReport& r);
nlohmann::json trig_to_json(const TrigPolynomial& t);

// Columns: t, theta_0..theta_{d-1}, r_0..r_{d-1}, H, method.
std::string trajectory_to_csv(const Trajectory& traj);

}  // namespace qpt
