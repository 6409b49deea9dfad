#include "qpt/serialization.hpp"

#include <sstream>

#include "qpt/errors.hpp"

namespace qpt {

using nlohmann::json;

nlohmann::json to_json(const LogAmplitude& a) {
  json j;
  j["sign"] = a.sign;
  j["log_mag"] = real_to_string(a.log_mag);
  return j;
}

LogAmplitude log_amplitude_from_json(const json& j) {
  int sign = j.at("sign").get<int>();
  if (sign == 0) return LogAmplitude::zero();
  return LogAmplitude::from_log(sign,
                                real_from_string(j.at("log_mag").get<std::string>()));
}

namespace {

json integer_vec_to_json(const std::vector<Integer>& k) {
  json a = json::array();
  for (const auto& v : k) a.push_back(v.str());
  return a;
}

std::vector<Integer> integer_vec_from_json(const json& a) {
  std::vector<Integer> k;
  for (const auto& v : a) k.emplace_back(v.get<std::string>());
  return k;
}

json pair_to_json(const ResonancePair& p) {
  json j;
  j["j"] = p.j;
  j["k"] = integer_vec_to_json(p.k);
  j["s"] = real_to_string(p.s);
  j["residual_log"] = real_to_string(p.residual_log);
  j["exact"] = p.exact;
  if (p.exact) j["s_rational"] = p.s_rational.str();
  j["inner0"] = to_json(p.inner0);
  return j;
}

ResonancePair pair_from_json(const json& j) {
  ResonancePair p;
  p.j = j.at("j").get<int>();
  p.k = integer_vec_from_json(j.at("k"));
  p.s = real_from_string(j.at("s").get<std::string>());
  p.residual_log = real_from_string(j.at("residual_log").get<std::string>());
  p.exact = j.at("exact").get<bool>();
  if (p.exact) p.s_rational = Rational(j.at("s_rational").get<std::string>());
  p.inner0 = log_amplitude_from_json(j.at("inner0"));
  return p;
}

}  // namespace

nlohmann::json family_to_json(const HamiltonianFamily& F) {
  json j;
  j["schema"] = "family-v1";
  j["precision_bits"] = precision_bits();
  j["map"] = to_string(F.map.kind);
  json omega = json::array();
  for (const auto& w : F.map.omega0) omega.push_back(real_to_string(w));
  j["omega"] = omega;
  j["variant"] = to_string(F.variant);
  j["C"] = real_to_string(F.C);
  j["l"] = F.l;
  j["residual_tol"] = real_to_string(F.residual_tol);
  json pairs = json::array();
  for (const auto& p : F.pairs) pairs.push_back(pair_to_json(p));
  j["pairs"] = pairs;
  return j;
}

HamiltonianFamily family_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "family-v1")
    throw error("family_from_json: expected schema family-v1");
  HamiltonianFamily F;
  F.map.kind = map_from_string(j.at("map").get<std::string>());
  for (const auto& w : j.at("omega"))
    F.map.omega0.push_back(real_from_string(w.get<std::string>()));
  F.variant = schedule_from_string(j.at("variant").get<std::string>());
  F.C = real_from_string(j.at("C").get<std::string>());
  F.l = j.at("l").get<long>();
  F.residual_tol = real_from_string(j.at("residual_tol").get<std::string>());
  for (const auto& p : j.at("pairs")) F.pairs.push_back(pair_from_json(p));
  return F;
}

namespace {

json state_to_json(const PhaseState& z) {
  json t = json::array(), r = json::array();
  for (const auto& x : z.theta) t.push_back(real_to_string(x));
  for (const auto& x : z.r) r.push_back(real_to_string(x));
  return json{{"theta", t}, {"r", r}};
}

}  // namespace

nlohmann::json report_to_json(const DiffusionReport& r) {
  json j;
  j["property"] = "P" + std::to_string(r.property.index);
  j["n"] = r.property.n;
  j["pass"] = r.pass;
  j["grid_only"] = r.grid_only;
  j["witness"] = state_to_json(r.witness);
  j["escape_time"] = to_json(r.escape_time);
  j["threshold_reached"] = real_to_string(r.threshold_reached);
  j["margin"] = real_to_string(r.margin);
  j["persistence_delta"] = to_json(r.persistence_delta);
  j["precision_bits"] = precision_bits();
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

nlohmann::json report_to_json(const ConjugacyReport& r) {
  json j;
  j["pass"] = r.pass;
  j["checked"] = r.checked;
  j["max_residual"] = real_to_string(r.max_residual);
  j["worst_point"] = state_to_json(r.worst);
  j["point_errors"] = r.point_errors;
  j["precision_bits"] = precision_bits();
  return j;
}

nlohmann::json trig_to_json(const TrigPolynomial& t) {
  json terms = json::array();
  for (const auto& term : t.terms) {
    json e;
    e["k"] = integer_vec_to_json(term.k);
    e["sign"] = term.coeff.sign;
    e["log_coeff"] = real_to_string(term.coeff.log_mag);
    terms.push_back(e);
  }
  return json{{"terms", terms}};
}

std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream out;
  if (traj.states.empty()) return "";
  const std::size_t d = traj.states[0].theta.size();
  out << "t";
  for (std::size_t i = 0; i < d; ++i) out << ",theta_" << i;
  for (std::size_t i = 0; i < d; ++i) out << ",r_" << i;
  out << ",H,method\n";
  for (std::size_t row = 0; row < traj.states.size(); ++row) {
    out << real_to_string(traj.times[row]);
    for (const auto& x : traj.states[row].theta) out << "," << real_to_string(x);
    for (const auto& x : traj.states[row].r) out << "," << real_to_string(x);
    out << "," << real_to_string(traj.energies[row]) << "," << traj.method
        << "\n";
  }
  return out.str();
}

}  // namespace qpt
