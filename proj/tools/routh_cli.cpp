// Command-line driver: simulate, reduce, verify and compare scenarios.
//
// Exit status: 0 when every report passes, 1 when a check fails, 2 on a
// configuration error.

#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "routh/errors.hpp"
#include "routh/scenario.hpp"

namespace {

int finish(const routh::ScenarioResult& result, const std::string& scenario, const std::string& out_dir) {
  if (!out_dir.empty()) routh::write_artifacts(result, scenario, out_dir);
  std::cout << routh::to_json(result.reports, scenario) << '\n';
  return result.pass() ? 0 : 1;
}

// A numerical failure becomes a failing report so artifacts stay uniform.
routh::ScenarioResult failed(const std::string& check, const routh::Error& e) {
  routh::ScenarioResult r;
  routh::VerificationReport rep;
  rep.check = check;
  rep.max_violation = std::numeric_limits<double>::infinity();
  rep.pass = false;
  r.reports.push_back(rep);
  std::cerr << "error: " << e.what();
  if (e.failing_time()) std::cerr << " (t = " << *e.failing_time() << ")";
  std::cerr << '\n';
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-step Routh reduction toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, connection = "mechanical", suite;
  double mu = 0.0, tol = 1e-6;
  std::uint64_t seed = 42;
  int probes = 100;

  CLI::App* simulate = app.add_subcommand("simulate", "Integrate the full system");
  simulate->add_option("--config", config_path, "JSON scenario file")->required();
  simulate->add_option("--out", out_dir, "Artifact directory");

  CLI::App* reduce = app.add_subcommand("reduce", "Reduce, integrate and reconstruct");
  reduce->add_option("--config", config_path, "JSON scenario file")->required();
  reduce->add_option("--connection", connection, "mechanical or A0")
      ->check(CLI::IsMember({"mechanical", "A0"}));
  reduce->add_option("--mu", mu, "Momentum value")->required();
  reduce->add_option("--out", out_dir, "Artifact directory");

  CLI::App* verify = app.add_subcommand("verify", "Run a builtin verification suite");
  verify->add_option("--suite", suite, "pullback, tangency, reducibility or hamiltonian")
      ->required()
      ->check(CLI::IsMember({"pullback", "tangency", "reducibility", "hamiltonian"}));
  verify->add_option("--seed", seed, "Probe seed");
  verify->add_option("--probes", probes, "Probe count")->check(CLI::PositiveNumber);
  verify->add_option("--out", out_dir, "Artifact directory");

  CLI::App* compare = app.add_subcommand("compare", "Compare full and reduced dynamics");
  compare->add_option("--config", config_path, "JSON scenario file")->required();
  compare->add_option("--tol", tol, "Trajectory tolerance")->check(CLI::PositiveNumber);
  compare->add_option("--out", out_dir, "Artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      const routh::ScenarioConfig cfg = routh::load_config(config_path);
      try {
        return finish(routh::run_simulate(cfg), "simulate", out_dir);
      } catch (const routh::Error& e) {
        if (e.kind() == routh::ErrorKind::ConfigError) throw;
        return finish(failed("simulate", e), "simulate", out_dir);
      }
    }
    if (*reduce) {
      const routh::ScenarioConfig cfg = routh::load_config(config_path);
      try {
        return finish(routh::run_reduce(cfg, routh::parse_connection(connection), mu), "reduce", out_dir);
      } catch (const routh::Error& e) {
        if (e.kind() == routh::ErrorKind::ConfigError) throw;
        return finish(failed("reduce", e), "reduce", out_dir);
      }
    }
    if (*verify) {
      try {
        return finish(routh::run_verify(routh::parse_suite(suite), seed, probes), "verify_" + suite, out_dir);
      } catch (const routh::Error& e) {
        if (e.kind() == routh::ErrorKind::ConfigError) throw;
        return finish(failed("verify_" + suite, e), "verify_" + suite, out_dir);
      }
    }
    if (*compare) {
      const routh::ScenarioConfig cfg = routh::load_config(config_path);
      try {
        return finish(routh::run_compare(cfg, tol), "compare", out_dir);
      } catch (const routh::Error& e) {
        if (e.kind() == routh::ErrorKind::ConfigError) throw;
        return finish(failed("compare", e), "compare", out_dir);
      }
    }
  } catch (const routh::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
