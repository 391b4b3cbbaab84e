#pragma once

// Lie algebra actions in coordinates, momentum maps, G-regularity,
// principal connections and Bg-potentials.

#include <optional>
#include <span>
#include <vector>

#include "routh/lagrangian.hpp"

namespace routh {

/// Infinitesimal action of a Lie algebra of dimension g_dim on a coordinate
/// space of dimension space_dim (Q, or P when the action lives there).
/// sigma(x) has one column per basis element: column b is the generator
/// (e_b)_x. When the space is P the first n rows are the Q components.
struct GroupAction {
  int g_dim = 1;
  int space_dim = 1;
  std::function<Mat(const Vec& x)> sigma;
  /// c^a_{bc} at index (a * g + b) * g + c; empty means Abelian.
  std::vector<double> structure_constants;
  /// Coordinates on which the action is a pure translation, one per
  /// generator, in generator order.
  std::vector<int> translation_coords;

  Mat generators(const Vec& x) const;
  double structure_constant(int a, int b, int c) const;
  /// [xi, zeta] in the basis.
  Vec bracket(const Vec& xi, const Vec& zeta) const;
  bool abelian() const;

  /// Translation action along the listed coordinates of a space of dimension
  /// space_dim.
  static GroupAction translations(int space_dim, std::vector<int> coords);
};

/// Throws InvalidArgument when structure constants are not antisymmetric in
/// their lower indices or sizes are off.
void validate_action(const GroupAction& action);

/// Max over probes of rank deficiency; throws NotFreeAction when sigma loses
/// rank at a probe.
void check_free(const GroupAction& action, std::span<const Vec> points);

/// delta : P -> g*, the correction of a momentum map under a magnetic term.
struct BgPotential {
  VectorField delta;  ///< R^{dim P} -> R^{g}
};

/// J_b = alpha_i sigma^i_b(q) - delta_b(point).
Vec momentum_map(const MagneticLagrangianSystem& sys, const GroupAction& action, const Vec& s,
                 const BgPotential* delta = nullptr);

struct GRegularityReport {
  std::vector<Mat> jacobian;  ///< dJ/dxi = sigma^T W sigma per probe
  std::vector<double> condition;
  bool regular = true;
};
GRegularityReport check_G_regular(const MagneticLagrangianSystem& sys, const GroupAction& action,
                                  std::span<const Vec> probes);

/// Principal connection as a g-valued 1-form on Q: component a is
/// A^a_i(q) dq^i, so coefficients(q) is g_dim x n.
struct Connection {
  int n = 1;
  int g_dim = 1;
  std::function<Mat(const Vec& q)> coefficients;
  /// Optional exact derivatives: element c is dA/dq^c.
  std::function<std::vector<Mat>(const Vec& q)> derivative;
  double fd_step = 1e-6;

  Mat operator()(const Vec& q) const { return coefficients(q); }
  std::vector<Mat> derivatives(const Vec& q) const;
};

/// max |A(sigma) - Id| over probes.
double connection_defect(const Connection& conn, const GroupAction& action, std::span<const Vec> probes);

/// A = (sigma^T W sigma)^{-1} sigma^T W with W = d2L/dv2 at (q, 0). Throws
/// NotMechanical when W is not symmetric positive definite or depends on v.
Connection mechanical_connection(const MagneticLagrangianSystem& sys, const GroupAction& action);

struct ContractedConnection {
  Vec covector;        ///< A_mu = mu_a A^a
  AntisymMatrix curvature;  ///< d A_mu
};
ContractedConnection connection_one_form_mu(const Connection& conn, const Vec& mu, const Vec& q);

struct BgPotentialReport {
  double max_violation = 0.0;
  std::size_t probes = 0;
};
/// max |i_{xi_P} B - d<delta, xi>| over probes and basis elements.
BgPotentialReport verify_bg_potential(const TwoFormField& b, const GroupAction& action,
                                      const BgPotential& delta, std::span<const Vec> probes);

/// Sigma_delta(xi_a, xi_b) = -xi_a(delta_b) - delta_{[xi_a, xi_b]} at a point.
Mat infinitesimal_cocycle(const GroupAction& action, const BgPotential& delta, const Vec& point);

/// max |dL/dq^c| over the translation coordinates and probes.
double invariance_defect(const MagneticLagrangianSystem& sys, const GroupAction& action,
                         std::span<const Vec> probes);

}  // namespace routh
