// Command-line laboratory for the unstable-tori Hamiltonian families:
// builds families from JSON configs, runs certification suites, measures
// diffusion, and dumps resonance / frequency-extension data.
//
// Exit codes: 0 pass, 1 certified fail (or module error), 2 usage/parse,
// 3 precision/capacity.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpt/arithmetic.hpp"
#include "qpt/diffusion.hpp"
#include "qpt/errors.hpp"
#include "qpt/flow.hpp"
#include "qpt/hamiltonian.hpp"
#include "qpt/normalform.hpp"
#include "qpt/rng.hpp"
#include "qpt/serialization.hpp"

using nlohmann::json;
using namespace qpt;

namespace {

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw error("cannot write " + path);
  out << content;
}

// FNV-1a over the input bytes; embedded in reports for reproducibility.
std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Frequency components: decimal strings, or "sqrt(x)" evaluated at the
// working precision.
Real parse_component(const std::string& tok) {
  if (tok.rfind("sqrt(", 0) == 0 && tok.back() == ')')
    return sqrt(real_from_string(tok.substr(5, tok.size() - 6)));
  return real_from_string(tok);
}

struct TagInfo {
  MapVariant map;
  ScheduleVariant variant;
};

TagInfo theorem_tag(const std::string& tag) {
  if (tag == "th1") return {MapVariant::hat, ScheduleVariant::i};
  if (tag == "th2") return {MapVariant::hat, ScheduleVariant::ii};
  if (tag == "th03a") return {MapVariant::constant, ScheduleVariant::iii};
  if (tag == "th03b") return {MapVariant::constant, ScheduleVariant::iv};
  if (tag == "th3") return {MapVariant::constant, ScheduleVariant::v};
  if (tag == "th3bis") return {MapVariant::constant, ScheduleVariant::vi};
  if (tag == "th4") return {MapVariant::constant, ScheduleVariant::vii};
  throw usage_error("unknown theorem tag: " + tag);
}

FrequencyVector frequency_from_config(const json& cfg, int d) {
  const json& f = cfg.at("frequency");
  if (f.contains("superliouville")) {
    const json& sl = f.at("superliouville");
    std::vector<long long> exps;
    if (sl.contains("exponents"))
      exps = sl.at("exponents").get<std::vector<long long>>();
    return construct_superliouville(d, sl.at("depth").get<int>(), exps);
  }
  FrequencyVector fv;
  for (const auto& c : f.at("components"))
    fv.omega.push_back(parse_component(c.get<std::string>()));
  if (static_cast<int>(fv.omega.size()) != d)
    throw usage_error("frequency component count does not match d");
  return fv;
}

HamiltonianFamily family_from_config(const json& cfg, json* build_log) {
  TagInfo tag = theorem_tag(cfg.at("theorem").get<std::string>());
  if (cfg.contains("map")) {
    MapVariant m = map_from_string(cfg.at("map").get<std::string>());
    if (tag.variant != ScheduleVariant::i && m != tag.map)
      throw usage_error("map override is only meaningful for th1 (hat or bar)");
    tag.map = m;
  }
  int d = cfg.at("d").get<int>();
  int n = cfg.at("n").get<int>();
  if (n < 1) throw usage_error("n >= 1 required");
  FrequencyVector fv = frequency_from_config(cfg, d);

  SequenceOptions so;
  so.count = n - 1;
  if (cfg.contains("sequence")) {
    const json& sq = cfg.at("sequence");
    if (sq.contains("growth")) so.growth = real_from_string(sq.at("growth"));
    if (sq.contains("scan_limit")) so.scan_limit = sq.at("scan_limit").get<long long>();
    if (sq.contains("tau")) so.tau = real_from_string(sq.at("tau"));
  }
  if (tag.variant == ScheduleVariant::ii && !so.tau && cfg.contains("tau"))
    so.tau = real_from_string(cfg.at("tau").get<std::string>());
  if (tag.variant == ScheduleVariant::iii || tag.variant == ScheduleVariant::iv)
    so.steep_inner_filter = cfg.value("steep_inner_filter", true);

  HamiltonianFamily F;
  F.map.kind = tag.map;
  F.map.omega0 = fv.omega;
  F.variant = tag.variant;
  if (cfg.contains("C")) F.C = real_from_string(cfg.at("C").get<std::string>());
  if (cfg.contains("l")) F.l = cfg.at("l").get<long>();
  if (cfg.contains("residual_tol"))
    F.residual_tol = real_from_string(cfg.at("residual_tol").get<std::string>());

  if (n >= 2) {
    SequenceResult sr = resonance_sequence(fv, tag.map, so);
    if (static_cast<int>(sr.pairs.size()) < n - 1)
      throw error("build: only " + std::to_string(sr.pairs.size()) +
                  " resonance pairs available (requested n=" + std::to_string(n) +
                  "); " + sr.note);
    // Accept pairs one by one, certifying the flow-closeness budget when the
    // config provides one.
    NextTermBudget budget;
    bool use_budget = cfg.contains("budget");
    if (use_budget) {
      const json& b = cfg.at("budget");
      budget.Delta = real_from_string(b.value("Delta", "0.5"));
      budget.T = real_from_string(b.value("T", "10"));
      budget.delta_req = real_from_string(b.value("delta_req", "1e-10"));
    }
    json accepted = json::array();
    for (const auto& pr : sr.pairs) {
      if (static_cast<int>(F.pairs.size()) >= n - 1) break;
      if (use_budget) {
        budget.L = lipschitz_bound(F, budget.Delta, Real(2));
        NextTermChoice ch = choose_next_k(F, {pr}, budget);
        if (!ch.found)
          throw error("build: pair j=" + std::to_string(pr.j) +
                      " violates the flow-closeness budget: " + ch.note);
        json cert;
        cert["j"] = static_cast<int>(F.pairs.size()) + 2;
        cert["field_delta"] = real_to_string(ch.field_delta);
        cert["flow_divergence"] = real_to_string(ch.flow_divergence);
        accepted.push_back(cert);
        F.pairs.push_back(ch.pair);
      } else {
        F.pairs.push_back(pr);
      }
    }
    if (build_log) (*build_log)["budget_certificates"] = accepted;
  }
  if (build_log) {
    (*build_log)["theorem"] = cfg.at("theorem");
    if (tag.variant == ScheduleVariant::ii) {
      Real rho_max = F.C / (8 * pi() * d);
      (*build_log)["analyticity_rho_max"] = real_to_string(rho_max);
      if (cfg.contains("rho")) {
        Real rho = real_from_string(cfg.at("rho").get<std::string>());
        if (rho >= rho_max * Real("0.99"))
          throw error("build: rho must stay 1% below C/(8 pi d)");
        (*build_log)["rho"] = real_to_string(rho);
      }
    }
  }
  return F;
}

std::vector<PhaseState> admissible_points(const HamiltonianFamily& F, int count,
                                          std::uint64_t seed, Real s_lo,
                                          Real s_hi) {
  CounterRng rng(seed);
  std::vector<PhaseState> pts;
  const int d = F.d();
  while (static_cast<int>(pts.size()) < count) {
    PhaseState z;
    for (int i = 0; i < d; ++i) z.theta.push_back(rng.uniform01());
    for (int i = 0; i + 1 < d; ++i) z.r.push_back(rng.uniform(Real(-1), Real(1)));
    z.r.push_back(rng.uniform(s_lo, s_hi));
    pts.push_back(std::move(z));
  }
  return pts;
}

int cmd_certify(const std::string& family_path, const std::string& suite,
                const std::string& out_path, std::uint64_t seed) {
  std::string bytes = read_file(family_path);
  HamiltonianFamily F = family_from_json(json::parse(bytes));
  json rep;
  rep["suite"] = suite;
  rep["input_hash"] = content_hash(bytes);
  rep["precision_bits"] = precision_bits();
  bool pass = false;

  if (suite == "conjugacy") {
    Real s_lo("-0.4"), s_hi("0.4");
    if (F.variant == ScheduleVariant::v) { s_lo = -1; s_hi = Real("-0.1"); }
    auto pts = admissible_points(F, 100, seed, s_lo, s_hi);
    ConjugacyReport cr = verify_conjugacy(F, F.n(), pts, Real("1e-25"));
    rep["report"] = report_to_json(cr);
    pass = cr.pass;
  } else if (suite == "convergence") {
    Real Delta("1"), rho("0.01");
    json table = json::array();
    bool decreasing = true;
    LogAmplitude prev;
    try {
      for (int from = 1; from <= F.n(); ++from) {
        LogAmplitude tb = tail_bound(F, from, std::nullopt, Delta, rho);
        if (from > 1 && !tb.abs_less(prev) && !tb.is_zero()) decreasing = false;
        table.push_back({{"from", from}, {"bound", to_json(tb)}});
        prev = tb;
      }
      pass = decreasing;
    } catch (const divergence_error& e) {
      rep["error"] = e.what();
      pass = false;
    }
    rep["Delta"] = real_to_string(Delta);
    rep["rho"] = real_to_string(rho);
    rep["table"] = table;
  } else if (suite == "bnf") {
    try {
      json slopes = json::array();
      pass = true;
      for (int P = 2; P <= 3; ++P) {
        Real sl = bnf_remainder_order(F, F.n(), P);
        slopes.push_back({{"P", P}, {"slope", real_to_string(sl)}});
        if (!(sl >= P + Real("0.9"))) pass = false;
      }
      rep["slopes"] = slopes;
    } catch (const variant_error& e) {
      rep["error"] = e.what();
      pass = false;
    }
  } else if (suite == "flow-oracle") {
    auto pts = admissible_points(F, 3, seed, Real("-0.3"), Real("0.3"));
    Real worst{0};
    NumericOptions opt;
    opt.rtol = Real("1e-14");
    opt.atol = Real("1e-18");
    for (const auto& z : pts) {
      for (int e = 0; e <= 1; ++e) {
        Real t = pow(Real(10), e);
        PhaseState a = exact_flow(F, z, t);
        PhaseState b = numeric_flow(F, z, t, opt);
        for (int i = 0; i < F.d(); ++i) {
          Real dt = abs(mod1(a.theta[i] - b.theta[i] + Real(1) / 2) - Real(1) / 2);
          worst = (std::max)({worst, dt, Real(abs(a.r[i] - b.r[i]))});
        }
      }
    }
    rep["max_coordinate_gap"] = real_to_string(worst);
    pass = worst < Real("1e-8");
  } else if (suite == "regularity") {
    try {
      PhaseState probe;
      probe.theta.assign(F.d(), Real("0.2"));
      probe.r.assign(F.d(), Real(0));
      probe.r[F.d() - 1] = Real(1) / 2;
      json seqs = json::array();
      bool conv = true, div = false;
      for (int m : {static_cast<int>(F.l), static_cast<int>(F.l) + 1}) {
        auto vals = regularity_probe(F, m, probe, 2, F.n());
        json seq = json::array();
        Real prev_inc{0};
        for (std::size_t i = 0; i < vals.size(); ++i) {
          seq.push_back({{"n", vals[i].n},
                         {"value", real_to_string(vals[i].value)},
                         {"fd_error", real_to_string(vals[i].error_estimate)}});
          if (i > 0) {
            Real inc = abs(vals[i].value - vals[i - 1].value);
            if (m == F.l && i > 1 && inc > prev_inc) conv = false;
            if (m == F.l + 1 && inc > Real(1)) div = true;
            prev_inc = inc;
          }
        }
        seqs.push_back({{"order", m}, {"sequence", seq}});
      }
      rep["sequences"] = seqs;
      rep["order_l_convergent"] = conv;
      rep["order_l_plus_1_divergent"] = div;
      pass = conv && div;
    } catch (const variant_error& e) {
      rep["error"] = e.what();
      pass = false;
    }
  } else {
    throw usage_error("unknown suite: " + suite);
  }

  rep["pass"] = pass;
  write_file(out_path, rep.dump(2) + "\n");
  return pass ? 0 : 1;
}

int cmd_diffuse(const std::string& family_path, const std::string& prop_str,
                int n_flag, int grid, const std::string& out_path,
                const std::string& traj_path) {
  std::string bytes = read_file(family_path);
  HamiltonianFamily F = family_from_json(json::parse(bytes));
  if (prop_str.size() != 2 || prop_str[0] != 'P')
    throw usage_error("property must be P1..P6");
  PropertyId prop;
  prop.index = prop_str[1] - '0';
  prop.n = (n_flag > 0) ? n_flag : F.n();
  prop.C = F.C;
  DiffusionReport r = check_property(F, prop.n, prop, grid);
  json rep = report_to_json(r);
  rep["input_hash"] = content_hash(bytes);
  write_file(out_path, rep.dump(2) + "\n");

  if (!traj_path.empty() && !r.escape_time.is_zero()) {
    // 1000 log-spaced samples of the witness trajectory up to the witnessed t.
    Real t_end = r.escape_time.to_real();
    Trajectory traj;
    traj.method = "exact";
    for (int i = 0; i < 1000; ++i) {
      Real t = t_end * pow(Real(10), Real(-6) * (999 - i) / 999);
      PhaseState z = exact_flow(F, r.witness, t);
      traj.times.push_back(t);
      traj.energies.push_back(eval_H(F, z));
      traj.states.push_back(std::move(z));
    }
    write_file(traj_path, trajectory_to_csv(traj));
  }
  return r.pass ? 0 : 1;
}

int cmd_resonances(const std::string& config_path, const std::string& out_path) {
  json cfg = json::parse(read_file(config_path));
  int d = cfg.at("d").get<int>();
  MapVariant map = map_from_string(cfg.value("map", "hat"));
  FrequencyVector fv = frequency_from_config(cfg, d);
  SequenceOptions so;
  so.count = cfg.value("count", 3);
  if (cfg.contains("tau")) so.tau = real_from_string(cfg.at("tau").get<std::string>());
  if (cfg.contains("scan_limit")) so.scan_limit = cfg.at("scan_limit").get<long long>();
  SequenceResult sr = resonance_sequence(fv, map, so);
  json out;
  out["shortfall"] = sr.shortfall;
  out["note"] = sr.note;
  json pairs = json::array();
  for (const auto& p : sr.pairs) {
    json e;
    e["j"] = p.j;
    json k = json::array();
    for (const auto& v : p.k) k.push_back(v.str());
    e["k"] = k;
    e["s"] = real_to_string(p.s);
    e["exact"] = p.exact;
    if (p.exact) e["s_rational"] = p.s_rational.str();
    e["inner0"] = to_json(p.inner0);
    pairs.push_back(e);
  }
  out["pairs"] = pairs;
  out["input_hash"] = content_hash(read_file(config_path));
  write_file(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_extend(const std::string& config_path, const std::string& out_path) {
  json cfg = json::parse(read_file(config_path));
  std::vector<Real> ot;
  for (const auto& c : cfg.at("omega_tilde"))
    ot.push_back(parse_component(c.get<std::string>()));
  auto cands = extend_frequency(
      ot, real_from_string(cfg.at("lo").get<std::string>()),
      real_from_string(cfg.at("hi").get<std::string>()),
      cfg.value("samples", 64), cfg.value("K", 10L),
      real_from_string(cfg.value("tau", "2")));
  json out = json::array();
  for (const auto& c : cands)
    out.push_back({{"omega_d", real_to_string(c.omega_d)},
                   {"gamma", real_to_string(c.gamma)}});
  write_file(out_path, out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laboratory for explicit Hamiltonian families with unstable "
               "quasi-periodic tori"};
  app.require_subcommand(1);
  unsigned prec = 256;
  app.add_option("--precision-bits", prec, "working precision in bits");

  std::string config, out = "out.json", family, suite, prop = "P1", traj;
  std::uint64_t seed = 0;
  int grid = 3, n_flag = 0;

  auto* build = app.add_subcommand("build", "construct a family from a config");
  build->add_option("--config", config)->required();
  build->add_option("--out", out);

  auto* certify = app.add_subcommand("certify", "run a certification suite");
  certify->add_option("--family", family)->required();
  certify->add_option("--suite", suite)
      ->required()
      ->check(CLI::IsMember({"conjugacy", "convergence", "bnf", "flow-oracle",
                             "regularity"}));
  certify->add_option("--out", out);
  certify->add_option("--seed", seed);

  auto* diffuse = app.add_subcommand("diffuse", "check an escape property");
  diffuse->add_option("--family", family)->required();
  diffuse->add_option("--property", prop)->required();
  diffuse->add_option("--n", n_flag);
  diffuse->add_option("--grid", grid);
  diffuse->add_option("--out", out);
  diffuse->add_option("--traj", traj);

  auto* resonances = app.add_subcommand("resonances", "resonance ladder table");
  resonances->add_option("--config", config)->required();
  resonances->add_option("--out", out);

  auto* extend = app.add_subcommand("extend-frequency",
                                    "sample Diophantine last components");
  extend->add_option("--config", config)->required();
  extend->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  set_precision_bits(prec);

  try {
    if (app.got_subcommand(build)) {
      std::string bytes = read_file(config);
      json cfg = json::parse(bytes);
      json log;
      HamiltonianFamily F = family_from_config(cfg, &log);
      json j = family_to_json(F);
      log["config_hash"] = content_hash(bytes);
      j["log"] = log;
      write_file(out, j.dump(2) + "\n");
      return 0;
    }
    if (app.got_subcommand(certify)) return cmd_certify(family, suite, out, seed);
    if (app.got_subcommand(diffuse))
      return cmd_diffuse(family, prop, n_flag, grid, out, traj);
    if (app.got_subcommand(resonances)) return cmd_resonances(config, out);
    if (app.got_subcommand(extend)) return cmd_extend(config, out);
  } catch (const usage_error& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "parse"}}.dump() << "\n";
    return 2;
  } catch (const variant_error& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "variant-mismatch"}}.dump()
              << "\n";
    return 2;
  } catch (const precision_error& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "precision"}}.dump() << "\n";
    return 3;
  } catch (const capacity_error& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "capacity"}}.dump() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "module"}}.dump() << "\n";
    return 1;
  }
  return 2;
}
