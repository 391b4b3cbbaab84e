#pragma once

// Fiberwise reduction by translation actions and the two-step Routh
// pipeline: psi_{L,beta} with beta from (mu, delta), then the quotient by
// G_mu. Reconstruction of the dropped group coordinates.

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "routh/symmetry.hpp"
#include "routh/transform.hpp"

namespace routh {

/// Translation action on fiber coordinates of P -> Q. Coordinates are
/// indices into the point (q, p), so every entry is >= n.
struct FiberwiseAction {
  BundleDims dims;
  std::vector<int> dropped;  ///< point indices removed by the quotient

  GroupAction action() const;
  BundleDims reduced_dims() const { return {dims.n, dims.k - static_cast<int>(dropped.size())}; }
  /// Point indices that survive, in order.
  std::vector<int> kept() const;
  /// State s on T_P Q -> state on T_{P/G} Q.
  Vec project(const Vec& s) const;
  /// Reduced state -> state with the dropped coordinates set to `values`.
  Vec embed(const Vec& reduced, const Vec& values) const;
  /// d(project) as a matrix.
  Mat projection_matrix() const;
};

struct ReducibilityTolerances {
  double lagrangian = 1e-10;    ///< |dL/d(dropped)|
  double contraction = 1e-10;   ///< |i_xi B|
  double invariance = 1e-5;     ///< |dB/d(dropped)| by finite differences
};

struct ReducibilityReport {
  double lagrangian = 0.0;
  double contraction = 0.0;
  double invariance = 0.0;
  int worst_probe = -1;
  bool reducible = true;
};

ReducibilityReport check_fiberwise_reducible(const MagneticLagrangianSystem& sys, const FiberwiseAction& fa,
                                             std::span<const Vec> probes, const ReducibilityTolerances& tol = {});

/// L and B restricted to the slice where the dropped coordinates vanish.
/// Validates the reducibility conditions at `probes` and throws
/// NotReducible (with the probe index) on violation.
MagneticLagrangianSystem fiberwise_reduce(const MagneticLagrangianSystem& sys, const FiberwiseAction& fa,
                                          std::span<const Vec> probes, const ReducibilityTolerances& tol = {});

struct ProjectionReport {
  double omega = 0.0;            ///< |tau^* Omega_bar - Omega|
  double energy = 0.0;           ///< |E_bar(tau s) - E(s)|
  double fiber_derivative = 0.0; ///< |FL_bar(tau s) - FL(s)|
};
ProjectionReport verify_projection_identities(const MagneticLagrangianSystem& sys,
                                              const MagneticLagrangianSystem& reduced,
                                              const FiberwiseAction& fa, std::span<const Vec> probes);

/// beta = sigma_fib^{-T} (mu + delta) on the points of the adapted space,
/// where sigma_fib holds the fiber rows of the generators.
BetaMap build_beta_from_mu(const GroupAction& action, const Vec& mu, const BgPotential* delta,
                           const std::vector<int>& fiber_coords);

/// Adapted coordinates for a translation action on Q: base coordinates
/// first, then the group coordinates, with the pair (n - g, g, 0, 0), beta
/// from (mu, delta) and the fiber-frame connection Gamma = sigma_fib A_base.
struct AdaptedScheme {
  std::vector<int> order;  ///< adapted coordinate j is original coordinate order[j]
  TransformationPair pair;
  BetaMap beta;
  FiberConnection connection;
};
AdaptedScheme make_adapted_scheme(const GroupAction& action, const Vec& mu, const Connection& conn,
                                  const BgPotential* delta = nullptr);

struct RouthResult {
  std::shared_ptr<const CompatibleTransformation> transformation;
  MagneticLagrangianSystem intermediate;  ///< on T_{P1} Q1, P1 = Q in adapted order
  MagneticLagrangianSystem reduced;       ///< on T_{P1/G_mu} Q1
  FiberwiseAction quotient;
  Vec mu;
  Connection connection;
  std::vector<int> order;        ///< adapted coordinate j is original coordinate order[j]
  std::vector<int> group_coords; ///< original indices of the translation coordinates
};

struct RouthOptions {
  /// Generator indices spanning g_mu; empty means all (Abelian case).
  std::vector<int> isotropy;
  std::span<const Vec> probes;  ///< full-system states for the precondition checks
  const BgPotential* delta = nullptr;
  double invariance_tol = 1e-10;
};

/// Full system on TQ (k = 0) with a translation action -> both stages.
/// Throws NotInvariant when L depends on a translation coordinate and
/// SingularJacobian when the system is not G-regular at a probe.
RouthResult routh_reduce(const MagneticLagrangianSystem& full, const GroupAction& action, const Vec& mu,
                         const Connection& conn, const RouthOptions& options = {});

/// Full state (original order) -> reduced state.
Vec reduce_state(const RouthResult& rr, const Vec& full_state);
/// Full state with group coordinates `group0` and group velocities from the
/// momentum equation.
Vec lift_reduced_state(const RouthResult& rr, const Vec& reduced_state, const Vec& group0);

/// Group velocities along the reduced trajectory from the momentum equation,
/// group coordinates by fourth-order cumulative quadrature. Result is in the
/// original coordinate order.
Trajectory reconstruct(const RouthResult& rr, const Trajectory& reduced, const Vec& group0);

struct BmuReport {
  double contraction = 0.0;
  double invariance = 0.0;
};
BmuReport verify_bmu_reducible(const TwoFormField& b, const FiberwiseAction& fa, std::span<const Vec> points);

/// Cumulative integral of uniformly sampled values, fourth-order accurate.
std::vector<double> cumulative_quadrature(const std::vector<double>& f, double h);

}  // namespace routh
