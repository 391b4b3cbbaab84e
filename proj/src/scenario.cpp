#include "routh/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "routh/presym.hpp"

namespace routh {

using nlohmann::json;

void VerificationReport::settle() { pass = max_violation <= tolerance; }

namespace {

json report_json(const VerificationReport& r) {
  return json{{"check", r.check},       {"probes", r.probes},
              {"max_violation", std::isfinite(r.max_violation) ? json(r.max_violation) : json(nullptr)},
              {"tolerance", r.tolerance}, {"pass", r.pass},
              {"seed", r.seed},         {"fd_step", r.fd_step},
              {"h", r.h}};
}

VerificationReport make_report(std::string check, std::size_t probes, double violation, double tol,
                               std::uint64_t seed = 0, double fd_step = 0.0, double h = 0.0) {
  VerificationReport r{std::move(check), probes, violation, tol, false, seed, fd_step, h};
  r.settle();
  return r;
}

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

double number_at(const json& j, const char* key) {
  if (!j.contains(key)) config_error(std::string("missing field '") + key + "'");
  if (!j.at(key).is_number()) config_error(std::string("field '") + key + "' must be a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) config_error(std::string("field '") + key + "' must be finite");
  return v;
}

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? number_at(j, key) : fallback;
}

Vec vector_of(const json& j, const char* what) {
  if (!j.is_array()) config_error(std::string(what) + " must be an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) config_error(std::string(what) + " must hold numbers");
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) config_error(std::string(what) + " must be finite");
  return v;
}

std::vector<int> indices_of(const json& j, const char* what) {
  if (!j.is_array()) config_error(std::string(what) + " must be an array");
  std::vector<int> out;
  for (const json& e : j) {
    if (!e.is_number_integer()) config_error(std::string(what) + " must hold integers");
    out.push_back(e.get<int>());
  }
  return out;
}

MechanicalSpec parse_inline(const json& j) {
  if (!j.is_object()) config_error("inline system must be an object");
  if (j.value("type", std::string("mechanical")) != "mechanical")
    config_error("inline systems must have type 'mechanical'");
  MechanicalSpec spec;
  if (!j.contains("n") || !j.at("n").is_number_integer()) config_error("inline system needs integer 'n'");
  spec.n = j.at("n").get<int>();
  if (spec.n < 1) config_error("inline system needs n >= 1");
  if (!j.contains("mass") || !j.at("mass").is_array() || static_cast<int>(j.at("mass").size()) != spec.n)
    config_error("inline system needs an n x n 'mass' matrix");
  spec.mass.resize(spec.n, spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const Vec row = vector_of(j.at("mass")[i], "mass row");
    if (row.size() != spec.n) config_error("mass rows must have n entries");
    spec.mass.row(i) = row.transpose();
  }
  if (j.contains("potential")) {
    if (!j.at("potential").is_array()) config_error("'potential' must be an array");
    for (const json& t : j.at("potential")) {
      CosineTerm term{number_at(t, "coeff"), t.contains("wave") ? vector_of(t.at("wave"), "wave") : Vec()};
      if (term.wave.size() != spec.n) config_error("potential waves must have n entries");
      spec.potential.push_back(term);
    }
  }
  if (j.contains("periodic")) spec.periodic = indices_of(j.at("periodic"), "periodic");
  if (j.contains("group")) spec.group = indices_of(j.at("group"), "group");
  spec.id = j.value("id", std::string("inline"));
  try {
    spec.validate();
  } catch (const Error& e) {
    config_error(std::string("inline system: ") + e.what());
  }
  return spec;
}

}  // namespace

std::string to_json(const VerificationReport& report) { return report_json(report).dump(2); }

std::string to_json(const std::vector<VerificationReport>& reports, const std::string& scenario) {
  json arr = json::array();
  bool pass = true;
  for (const VerificationReport& r : reports) {
    arr.push_back(report_json(r));
    pass = pass && r.pass;
  }
  return json{{"scenario", scenario}, {"pass", pass}, {"reports", arr}}.dump(2);
}

ConnectionChoice parse_connection(const std::string& name) {
  if (name == "mechanical") return ConnectionChoice::Mechanical;
  if (name == "A0") return ConnectionChoice::A0;
  config_error("connection must be 'mechanical' or 'A0'");
}

const char* to_string(ConnectionChoice c) { return c == ConnectionChoice::Mechanical ? "mechanical" : "A0"; }

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("configuration must be a JSON object");

  ScenarioConfig cfg;
  if (!j.contains("system")) config_error("missing field 'system'");
  const json& sys = j.at("system");
  if (sys.is_string()) {
    if (sys.get<std::string>() != "three_body") config_error("unknown builtin system");
    cfg.three_body = true;
    if (j.contains("params")) {
      const json& p = j.at("params");
      if (!p.is_object()) config_error("'params' must be an object");
      cfg.params.I1 = number_or(p, "I1", cfg.params.I1);
      cfg.params.I2 = number_or(p, "I2", cfg.params.I2);
      cfg.params.I3 = number_or(p, "I3", cfg.params.I3);
      cfg.params.c1 = number_or(p, "c1", cfg.params.c1);
      cfg.params.c2 = number_or(p, "c2", cfg.params.c2);
      cfg.params.c3 = number_or(p, "c3", cfg.params.c3);
    }
    if (!(cfg.params.I1 > 0 && cfg.params.I2 > 0 && cfg.params.I3 > 0))
      config_error("moments of inertia must be positive");
  } else {
    cfg.three_body = false;
    cfg.inline_spec = parse_inline(sys);
  }

  if (j.contains("mu")) cfg.mu = number_at(j, "mu");
  if (j.contains("connection")) {
    if (!j.at("connection").is_string()) config_error("'connection' must be a string");
    cfg.connection = parse_connection(j.at("connection").get<std::string>());
    if (!cfg.three_body && cfg.connection == ConnectionChoice::A0)
      config_error("connection 'A0' exists for the three-body system only");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) config_error("'seed' must be a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }

  if (!j.contains("integrator")) config_error("missing field 'integrator'");
  const json& in = j.at("integrator");
  if (!in.is_object()) config_error("'integrator' must be an object");
  cfg.integrator.method = in.value("method", std::string("rk4"));
  if (cfg.integrator.method != "rk4" && cfg.integrator.method != "implicit_midpoint")
    config_error("integrator method must be 'rk4' or 'implicit_midpoint'");
  cfg.integrator.h = number_at(in, "h");
  cfg.integrator.t_end = number_at(in, "T");
  if (!(cfg.integrator.h > 0)) config_error("integrator step h must be positive");
  if (!(cfg.integrator.t_end >= 0)) config_error("integrator horizon T must be non-negative");
  try {
    step_count(cfg.integrator.h, cfg.integrator.t_end);
  } catch (const Error& e) {
    config_error(e.what());
  }

  const int n = cfg.three_body ? 3 : cfg.inline_spec.n;
  if (!j.contains("ic")) config_error("missing field 'ic'");
  const json& ic = j.at("ic");
  if (ic.is_array()) {
    cfg.ic = vector_of(ic, "ic");
    if (cfg.ic.size() != 2 * n) config_error("'ic' must have 2n entries");
  } else if (ic.is_object() && cfg.three_body) {
    const double theta = number_or(ic, "theta", 0.0);
    const double phi = number_at(ic, "phi");
    const double psi = number_at(ic, "psi");
    const double phidot = number_at(ic, "phidot");
    const double psidot = number_at(ic, "psidot");
    if (ic.contains("thetadot")) {
      cfg.ic.resize(6);
      cfg.ic << theta, phi, psi, number_at(ic, "thetadot"), phidot, psidot;
    } else {
      cfg.ic = three_body_state_on_level(cfg.params, theta, phi, psi, phidot, psidot, cfg.mu.value_or(0.0));
    }
  } else {
    config_error("'ic' must be an array (or an object for the three-body system)");
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read configuration file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

const Connection& ScenarioModel::connection(ConnectionChoice c) const {
  const std::optional<Connection>& conn = c == ConnectionChoice::Mechanical ? mechanical : a0;
  if (!conn) config_error(std::string("connection '") + to_string(c) + "' is not available for this system");
  return *conn;
}

ScenarioModel build_model(const ScenarioConfig& config) {
  if (config.three_body) {
    ThreeBodyModel tb = build_three_body(config.params);
    return {tb.system, tb.action, tb.mechanical, tb.a0};
  }
  ScenarioModel m{build_mechanical(config.inline_spec), std::nullopt, std::nullopt, std::nullopt};
  if (!config.inline_spec.group.empty()) {
    m.action = GroupAction::translations(config.inline_spec.n, config.inline_spec.group);
    m.mechanical = mechanical_connection(m.system, *m.action);
  }
  return m;
}

Vec adjust_to_momentum(const MagneticLagrangianSystem& sys, const GroupAction& action, const Vec& s,
                       const Vec& mu) {
  const int n = sys.dims.n;
  const std::vector<int>& group = action.translation_coords;
  if (group.empty()) throw Error(ErrorKind::InvalidArgument, "momentum adjustment needs translation coordinates");
  // J is affine in v for mechanical systems, so one Newton step is exact;
  // a second step absorbs rounding.
  Vec out = s;
  for (int iter = 0; iter < 2; ++iter) {
    const Vec r = momentum_map(sys, action, out) - mu;
    const Mat sig = action.generators(out.head(n));
    const Mat w = hessian(sys.lagrangian, out).block(n, n, n, n);
    const Mat dj = sig.transpose() * w;  // dJ/dv
    Mat a(action.g_dim, group.size());
    for (std::size_t c = 0; c < group.size(); ++c) a.col(c) = dj.col(group[c]);
    const Vec dv = a.fullPivLu().solve(r);
    for (std::size_t c = 0; c < group.size(); ++c) out[n + group[c]] -= dv[c];
  }
  return out;
}

Trajectory integrate(const FlowField& f, const Vec& s0, const IntegratorConfig& cfg, const std::string& id) {
  if (cfg.method == "implicit_midpoint") return integrate_implicit_midpoint(f, s0, cfg.h, cfg.t_end, id);
  return integrate_rk4(f, s0, cfg.h, cfg.t_end, id);
}

double sup_deviation(const Trajectory& a, const std::vector<int>& a_slots, const Trajectory& b,
                     const std::vector<int>& b_slots, const std::vector<bool>& angular) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "trajectories differ in length");
  if (a_slots.size() != b_slots.size() || angular.size() != a_slots.size())
    throw Error(ErrorKind::InvalidArgument, "slot lists differ in length");
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a_slots.size(); ++i) {
      const double x = a.states[k][a_slots[i]];
      const double y = b.states[k][b_slots[i]];
      const double d = angular[i] ? std::abs(angle_difference(x, y)) : std::abs(x - y);
      worst = std::max(worst, std::isnan(d) ? std::numeric_limits<double>::infinity() : d);
    }
  return worst;
}

std::vector<Vec> random_states(int dim, int angles, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<Vec> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec s(dim);
    for (int j = 0; j < dim; ++j) s[j] = j < angles ? angle(rng) : unit(rng);
    out.push_back(s);
  }
  return out;
}

bool ScenarioResult::pass() const {
  for (const VerificationReport& r : reports)
    if (!r.pass) return false;
  return true;
}

// ---------------------------------------------------------------------------

namespace {

double energy_drift(const MagneticLagrangianSystem& sys, const Trajectory& traj) {
  const double e0 = energy(sys, traj.states.front());
  double worst = 0.0;
  for (const Vec& s : traj.states) worst = std::max(worst, std::abs(energy(sys, s) - e0));
  return worst;
}

double momentum_defect(const MagneticLagrangianSystem& sys, const GroupAction& action, const Trajectory& traj,
                       const Vec& mu) {
  double worst = 0.0;
  for (const Vec& s : traj.states)
    worst = std::max(worst, (momentum_map(sys, action, s) - mu).cwiseAbs().maxCoeff());
  return worst;
}

struct ReducedRun {
  RouthResult rr;
  Trajectory reduced;
  Trajectory reconstructed;
};

ReducedRun reduce_and_integrate(const ScenarioModel& model, ConnectionChoice choice, const Vec& mu,
                                const Vec& full_ic, const IntegratorConfig& integrator) {
  ReducedRun run{routh_reduce(model.system, *model.action, mu, model.connection(choice)), {}, {}};
  const Vec reduced_ic = reduce_state(run.rr, full_ic);
  run.reduced = integrate(el_flow(run.rr.reduced), reduced_ic, integrator, run.rr.reduced.id);
  Vec group0(run.rr.group_coords.size());
  for (std::size_t c = 0; c < run.rr.group_coords.size(); ++c) group0[c] = full_ic[run.rr.group_coords[c]];
  run.reconstructed = reconstruct(run.rr, run.reduced, group0);
  return run;
}

Vec momentum_for(const ScenarioConfig& config, const ScenarioModel& model, std::optional<double> mu_override) {
  if (!model.action) config_error("this scenario needs a system with a symmetry group");
  const int g = model.action->g_dim;
  if (mu_override) return Vec::Constant(g, *mu_override);
  if (config.mu) return Vec::Constant(g, *config.mu);
  return momentum_map(model.system, *model.action, config.ic);
}

std::vector<bool> angular_mask(const MagneticLagrangianSystem& sys, const std::vector<int>& coords) {
  std::vector<bool> mask;
  for (int c : coords)
    mask.push_back(std::find(sys.periodic_coords.begin(), sys.periodic_coords.end(), c) !=
                   sys.periodic_coords.end());
  return mask;
}

}  // namespace

ScenarioResult run_simulate(const ScenarioConfig& config) {
  const ScenarioModel model = build_model(config);
  ScenarioResult out;
  const IntegratorConfig& in = config.integrator;
  Trajectory traj = integrate(el_flow(model.system), config.ic, in, model.system.id);
  const double etol = in.method == "rk4" ? 1e-7 : 1e-5;
  out.reports.push_back(make_report("energy_drift", traj.size(), energy_drift(model.system, traj), etol,
                                    config.seed, 0.0, in.h));
  if (model.action) {
    const Vec j0 = momentum_map(model.system, *model.action, config.ic);
    out.reports.push_back(make_report("momentum_conservation", traj.size(),
                                      momentum_defect(model.system, *model.action, traj, j0), 1e-8, config.seed,
                                      0.0, in.h));
  }
  if (traj.size() >= 5)
    out.reports.push_back(make_report("el_residual", traj.size(), el_residual(model.system, traj).max, 1e-6,
                                      config.seed, 0.0, in.h));
  out.trajectories.push_back({"trajectory", std::move(traj), model.system.dims});
  return out;
}

ScenarioResult run_reduce(const ScenarioConfig& config, ConnectionChoice connection, double mu_value) {
  const ScenarioModel model = build_model(config);
  const Vec mu = momentum_for(config, model, mu_value);
  const Vec ic = adjust_to_momentum(model.system, *model.action, config.ic, mu);
  ReducedRun run = reduce_and_integrate(model, connection, mu, ic, config.integrator);
  const double h = config.integrator.h;
  ScenarioResult out;
  const std::string tag = std::string("[") + to_string(connection) + "]";
  if (run.reduced.size() >= 5) {
    out.reports.push_back(make_report("reduced_el_residual" + tag, run.reduced.size(),
                                      el_residual(run.rr.reduced, run.reduced).max, 1e-6, config.seed, 0.0, h));
    out.reports.push_back(make_report("reconstructed_el_residual" + tag, run.reconstructed.size(),
                                      el_residual(model.system, run.reconstructed).max, 1e-6, config.seed, 0.0, h));
  }
  out.reports.push_back(make_report("reconstructed_momentum" + tag, run.reconstructed.size(),
                                    momentum_defect(model.system, *model.action, run.reconstructed, mu), 1e-8,
                                    config.seed, 0.0, h));
  out.trajectories.push_back({"reduced", std::move(run.reduced), run.rr.reduced.dims});
  out.trajectories.push_back({"reconstructed", std::move(run.reconstructed), model.system.dims});
  return out;
}

ScenarioResult run_compare(const ScenarioConfig& config, double tol) {
  if (!(tol > 0)) config_error("tolerance must be positive");
  const ScenarioModel model = build_model(config);
  const Vec mu = momentum_for(config, model, std::nullopt);
  const Vec ic = adjust_to_momentum(model.system, *model.action, config.ic, mu);
  const double h = config.integrator.h;
  ScenarioResult out;

  Trajectory full = integrate(el_flow(model.system), ic, config.integrator, model.system.id);
  out.reports.push_back(make_report("momentum_conservation", full.size(),
                                    momentum_defect(model.system, *model.action, full, mu), 1e-8, config.seed, 0.0, h));
  out.reports.push_back(make_report("energy_drift", full.size(), energy_drift(model.system, full),
                                    config.integrator.method == "rk4" ? 1e-7 : 1e-5, config.seed, 0.0, h));

  std::vector<ConnectionChoice> choices{ConnectionChoice::Mechanical};
  if (model.a0) choices.push_back(ConnectionChoice::A0);
  std::vector<Trajectory> reduced;
  for (ConnectionChoice choice : choices) {
    ReducedRun run = reduce_and_integrate(model, choice, mu, ic, config.integrator);
    const std::string tag = std::string("[") + to_string(choice) + "]";
    const int n = model.system.dims.n;
    const int nb = run.rr.reduced.dims.n;
    // Reduced slots (q_base, v_base) against the matching full slots.
    std::vector<int> full_slots, red_slots, base;
    for (int j = 0; j < nb; ++j) base.push_back(run.rr.order[j]);
    for (int j = 0; j < nb; ++j) {
      red_slots.push_back(j);
      full_slots.push_back(base[j]);
    }
    for (int j = 0; j < nb; ++j) {
      red_slots.push_back(nb + j);
      full_slots.push_back(n + base[j]);
    }
    std::vector<bool> mask = angular_mask(model.system, base);
    mask.resize(2 * nb, false);
    out.reports.push_back(make_report("full_vs_reduced" + tag, full.size(),
                                      sup_deviation(run.reduced, red_slots, full, full_slots, mask), tol, config.seed,
                                      0.0, h));
    const std::vector<int>& group = run.rr.group_coords;
    out.reports.push_back(make_report("reconstruction" + tag, full.size(),
                                      sup_deviation(run.reconstructed, group, full, group,
                                                    angular_mask(model.system, group)),
                                      tol, config.seed, 0.0, h));
    out.trajectories.push_back({std::string("reduced_") + to_string(choice), run.reduced, run.rr.reduced.dims});
    out.trajectories.push_back(
        {std::string("reconstructed_") + to_string(choice), std::move(run.reconstructed), model.system.dims});
    reduced.push_back(std::move(run.reduced));
  }
  if (reduced.size() == 2) {
    const int d = static_cast<int>(reduced[0].states.front().size());
    std::vector<int> slots;
    for (int i = 0; i < d; ++i) slots.push_back(i);
    out.reports.push_back(make_report("connection_independence", full.size(),
                                      sup_deviation(reduced[0], slots, reduced[1], slots, std::vector<bool>(d, false)),
                                      1e-8, config.seed, 0.0, h));
  }
  out.trajectories.insert(out.trajectories.begin(), {"full", std::move(full), model.system.dims});
  return out;
}

// ---------------------------------------------------------------------------

VerifySuite parse_suite(const std::string& name) {
  if (name == "pullback") return VerifySuite::Pullback;
  if (name == "tangency") return VerifySuite::Tangency;
  if (name == "reducibility") return VerifySuite::Reducibility;
  if (name == "hamiltonian") return VerifySuite::Hamiltonian;
  config_error("suite must be one of pullback, tangency, reducibility, hamiltonian");
}

namespace {

constexpr double kVerifyMu = 0.5;

// Intermediate states (phi, psi, phidot, psidot, theta).
std::vector<Vec> intermediate_probes(std::uint64_t seed, int count) {
  return random_states(5, 2, count, seed);
}

void pullback_suite(const ThreeBodyModel& tb, ConnectionChoice choice, std::uint64_t seed, int count,
                    ScenarioResult& out) {
  const Connection& conn = choice == ConnectionChoice::Mechanical ? tb.mechanical : tb.a0;
  const Vec mu = Vec::Constant(1, kVerifyMu);
  const RouthResult rr = routh_reduce(tb.system, tb.action, mu, conn);
  const std::vector<Vec> probes = intermediate_probes(seed, count);
  const std::string tag = std::string("[") + to_string(choice) + "]";

  const PullbackReport exact = verify_pullback_identities(*rr.transformation, rr.intermediate, probes);
  out.reports.push_back(make_report("pullback_omega" + tag, exact.probes, exact.omega_violation, 1e-8, seed));
  out.reports.push_back(make_report("pullback_energy" + tag, exact.probes, exact.energy_violation, 1e-8, seed));
  out.reports.push_back(make_report("momentum_characterization" + tag, exact.probes, exact.characterization, 1e-10, seed));

  // Finite-difference mode: no exact derivative callbacks anywhere. The FD
  // momentum has a noise floor near 1e-10, so Newton stops at 1e-9.
  auto ct_fd = std::make_shared<const CompatibleTransformation>(
      rr.transformation->pair(), rr.transformation->source().finite_difference_copy(),
      BetaMap{rr.transformation->beta().beta.without_exact_derivatives()},
      rr.transformation->connection().without_exact_derivatives(), NewtonOptions{1e-9, 50});
  const MagneticLagrangianSystem induced_fd = induced_system(ct_fd).finite_difference_copy();
  const PullbackReport fd = verify_pullback_identities(*ct_fd, induced_fd, probes, JacobianMode::FiniteDifference);
  out.reports.push_back(make_report("pullback_omega_fd" + tag, fd.probes, fd.omega_violation, 1e-5, seed,
                                    induced_fd.lagrangian.fd_hessian_step));
  out.reports.push_back(make_report("pullback_energy_fd" + tag, fd.probes, fd.energy_violation, 1e-5, seed,
                                    induced_fd.lagrangian.fd_step));
}

// Defect X(dL/dvbar) - Y(beta) of the upstairs EL field; `perturb` adds a
// nonconstant function of theta to beta.
double tangency_defect(const ThreeBodyModel& tb, const RouthResult& rr, const std::vector<Vec>& probes,
                       bool perturb) {
  const CompatibleTransformation& ct = *rr.transformation;
  if (!perturb) return verify_tangency(ct, el_flow(ct.source()), probes).max_defect;
  (void)tb;
  const Vec mu = rr.mu;
  const int theta_slot = 2;  // theta within the P1 point (phi, psi, theta)
  VectorField beta;
  beta.value = [mu, theta_slot](const Vec& y) { return Vec(mu + Vec::Constant(1, 0.5 * std::sin(y[theta_slot]))); };
  beta.jacobian = [theta_slot](const Vec& y) {
    Mat j = Mat::Zero(1, y.size());
    j(0, theta_slot) = 0.5 * std::cos(y[theta_slot]);
    return j;
  };
  const CompatibleTransformation perturbed(ct.pair(), ct.source(), BetaMap{beta}, ct.connection());
  return verify_tangency(perturbed, el_flow(ct.source()), probes).max_defect;
}

void tangency_suite(const ThreeBodyModel& tb, ConnectionChoice choice, std::uint64_t seed, int count,
                    ScenarioResult& out) {
  const Connection& conn = choice == ConnectionChoice::Mechanical ? tb.mechanical : tb.a0;
  const RouthResult rr = routh_reduce(tb.system, tb.action, Vec::Constant(1, kVerifyMu), conn);
  const std::vector<Vec> probes = intermediate_probes(seed, count);
  const std::string tag = std::string("[") + to_string(choice) + "]";
  out.reports.push_back(make_report("tangency" + tag, probes.size(), tangency_defect(tb, rr, probes, false), 1e-8, seed));
  // Negative control: the violation is the shortfall below the detection
  // threshold 1e-3.
  const double perturbed = tangency_defect(tb, rr, probes, true);
  out.reports.push_back(make_report("tangency_negative_control" + tag, probes.size(),
                                    std::max(0.0, 1e-3 - perturbed), 0.0, seed));
}

void reducibility_suite(const ThreeBodyModel& tb, ConnectionChoice choice, std::uint64_t seed, int count,
                        ScenarioResult& out) {
  const Connection& conn = choice == ConnectionChoice::Mechanical ? tb.mechanical : tb.a0;
  const RouthResult rr = routh_reduce(tb.system, tb.action, Vec::Constant(1, kVerifyMu), conn);
  const std::vector<Vec> probes = intermediate_probes(seed, count);
  const std::string tag = std::string("[") + to_string(choice) + "]";
  const ReducibilityReport red = check_fiberwise_reducible(rr.intermediate, rr.quotient, probes);
  out.reports.push_back(make_report("lagrangian_invariance" + tag, probes.size(), red.lagrangian, 1e-10, seed));
  out.reports.push_back(make_report("magnetic_contraction" + tag, probes.size(), red.contraction, 1e-10, seed));
  out.reports.push_back(make_report("magnetic_invariance" + tag, probes.size(), red.invariance, 1e-5, seed,
                                    rr.intermediate.magnetic.fd_step));
  const ProjectionReport proj = verify_projection_identities(rr.intermediate, rr.reduced, rr.quotient, probes);
  out.reports.push_back(make_report("projection_omega" + tag, probes.size(), proj.omega, 1e-8, seed));
  out.reports.push_back(make_report("projection_energy" + tag, probes.size(), proj.energy, 1e-8, seed));
  out.reports.push_back(make_report("projection_fiber_derivative" + tag, probes.size(), proj.fiber_derivative, 1e-10, seed));
}

void hamiltonian_suite(const ThreeBodyModel& tb, ConnectionChoice choice, std::uint64_t seed, int count,
                       ScenarioResult& out) {
  const Connection& conn = choice == ConnectionChoice::Mechanical ? tb.mechanical : tb.a0;
  const Vec mu = Vec::Constant(1, kVerifyMu);
  const AdaptedScheme scheme = make_adapted_scheme(tb.action, mu, conn);
  const std::string tag = std::string("[") + to_string(choice) + "]";
  // Downstairs covector states (phi, psi, alpha_phi, alpha_psi, theta).
  const std::vector<Vec> down = intermediate_probes(seed, count);
  const HamPullbackReport pb =
      verify_ham_pullback(scheme.pair, scheme.connection, scheme.beta, TwoFormField::zero(scheme.pair.p2_dim()), down);
  out.reports.push_back(make_report("ham_pullback" + tag, pb.probes, pb.max_violation, 1e-8, seed));

  std::vector<Vec> level;
  for (const Vec& s : random_states(6, 3, count, seed + 1)) level.push_back(project_to_momentum_level(tb.action, mu, s));
  const MomentumShiftReport ms = momentum_shift_check(tb.action, mu, conn, level);
  out.reports.push_back(make_report("momentum_shift_level" + tag, ms.probes, ms.shifted_momentum, 1e-12, seed));
  out.reports.push_back(make_report("momentum_shift_round_trip" + tag, ms.probes, ms.round_trip, 1e-12, seed));
  out.reports.push_back(make_report("hamiltonian_relatedness" + tag, level.size(),
                                    hamiltonian_relatedness_defect(tb.hamiltonian, tb.action, mu, conn, level), 1e-8,
                                    seed));
}

}  // namespace

ScenarioResult run_verify(VerifySuite suite, std::uint64_t seed, int probes) {
  if (probes < 1) config_error("probe count must be positive");
  ThreeBodyParams params;
  params.c1 = 1.0;
  params.c2 = 1.0;
  const ThreeBodyModel tb = build_three_body(params);
  ScenarioResult out;
  for (ConnectionChoice choice : {ConnectionChoice::Mechanical, ConnectionChoice::A0}) {
    switch (suite) {
      case VerifySuite::Pullback: pullback_suite(tb, choice, seed, probes, out); break;
      case VerifySuite::Tangency: tangency_suite(tb, choice, seed, probes, out); break;
      case VerifySuite::Reducibility: reducibility_suite(tb, choice, seed, probes, out); break;
      case VerifySuite::Hamiltonian: hamiltonian_suite(tb, choice, seed, probes, out); break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_csv(const Trajectory& traj, const BundleDims& dims, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << "t";
  for (int i = 0; i < dims.n; ++i) out << ",q" << i;
  for (int i = 0; i < dims.n; ++i) out << ",v" << i;
  for (int i = 0; i < dims.k; ++i) out << ",p" << i;
  out << '\n';
  char buf[32];
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
    out << buf;
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", traj.states[k][i]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_artifacts(const ScenarioResult& result, const std::string& scenario, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const NamedTrajectory& t : result.trajectories) write_csv(t.trajectory, t.dims, dir / (t.name + ".csv"));
  std::ofstream out(dir / "report.json");
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write report.json");
  out << to_json(result.reports, scenario) << '\n';
}

}  // namespace routh
