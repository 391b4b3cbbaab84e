#pragma once

// Scenario configuration, verification reports and artifact output for the
// command-line driver.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "routh/integrators.hpp"
#include "routh/models.hpp"
#include "routh/reduction.hpp"

namespace routh {

struct VerificationReport {
  std::string check;
  std::size_t probes = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  double fd_step = 0.0;
  double h = 0.0;

  /// Sets pass from max_violation <= tolerance (false for NaN).
  void settle();
};

std::string to_json(const VerificationReport& report);
std::string to_json(const std::vector<VerificationReport>& reports, const std::string& scenario);

struct IntegratorConfig {
  std::string method = "rk4";  ///< "rk4" or "implicit_midpoint"
  double h = 1e-3;
  double t_end = 10.0;
};

enum class ConnectionChoice { Mechanical, A0 };
ConnectionChoice parse_connection(const std::string& name);
const char* to_string(ConnectionChoice c);

struct ScenarioConfig {
  bool three_body = true;
  ThreeBodyParams params;
  MechanicalSpec inline_spec;  ///< used when three_body is false
  Vec ic;                       ///< full initial state (2n)
  IntegratorConfig integrator;
  std::optional<double> mu;
  ConnectionChoice connection = ConnectionChoice::Mechanical;
  std::uint64_t seed = 42;
};

/// Parses and validates a JSON configuration; throws ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// System, symmetry and connections named by a configuration.
struct ScenarioModel {
  MagneticLagrangianSystem system;
  std::optional<GroupAction> action;
  std::optional<Connection> mechanical;
  std::optional<Connection> a0;
  const Connection& connection(ConnectionChoice c) const;
};
ScenarioModel build_model(const ScenarioConfig& config);

/// Group velocities of s replaced so that J = mu (mechanical systems).
Vec adjust_to_momentum(const MagneticLagrangianSystem& sys, const GroupAction& action, const Vec& s,
                       const Vec& mu);

Trajectory integrate(const FlowField& f, const Vec& s0, const IntegratorConfig& cfg, const std::string& id);

/// Sup-norm gap between two trajectories on the listed components; angle
/// components are compared modulo 2 pi.
double sup_deviation(const Trajectory& a, const std::vector<int>& a_slots, const Trajectory& b,
                     const std::vector<int>& b_slots, const std::vector<bool>& angular);

/// Uniform random states: the first `angles` components in [-pi, pi], the
/// rest in [-1, 1].
std::vector<Vec> random_states(int dim, int angles, int count, std::uint64_t seed);

struct NamedTrajectory {
  std::string name;
  Trajectory trajectory;
  BundleDims dims;
};

struct ScenarioResult {
  std::vector<NamedTrajectory> trajectories;
  std::vector<VerificationReport> reports;
  bool pass() const;
};

ScenarioResult run_simulate(const ScenarioConfig& config);
ScenarioResult run_reduce(const ScenarioConfig& config, ConnectionChoice connection, double mu);
ScenarioResult run_compare(const ScenarioConfig& config, double tol);

enum class VerifySuite { Pullback, Tangency, Reducibility, Hamiltonian };
VerifySuite parse_suite(const std::string& name);

/// Builtin three-body verification suites with seeded probes.
ScenarioResult run_verify(VerifySuite suite, std::uint64_t seed, int probes);

/// t, q0.., v0.., p0.. with %.17g values.
void write_csv(const Trajectory& traj, const BundleDims& dims, const std::filesystem::path& path);
/// One CSV per trajectory and report.json in `dir`.
void write_artifacts(const ScenarioResult& result, const std::string& scenario, const std::filesystem::path& dir);

}  // namespace routh
