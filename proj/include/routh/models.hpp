#pragma once

// Builtin systems: mechanical Lagrangians with constant mass matrix and a
// cosine-series potential, and the three planar rigid bodies sharing a
// fixed point.

#include <string>
#include <vector>

#include "routh/hamside.hpp"
#include "routh/symmetry.hpp"

namespace routh {

struct CosineTerm {
  double coeff = 0.0;
  Vec wave;  ///< V gets coeff * cos(wave . q)
};

/// L = 1/2 v^T M v - sum_t c_t cos(w_t . q), with exact derivatives.
struct MechanicalSpec {
  int n = 1;
  Mat mass;
  std::vector<CosineTerm> potential;
  std::vector<int> periodic;
  std::vector<int> group;  ///< translation coordinates of the symmetry, if any
  std::string id = "mechanical";

  void validate() const;
  double potential_value(const Vec& q) const;
};

MagneticLagrangianSystem build_mechanical(const MechanicalSpec& spec);
/// H = 1/2 alpha^T M^{-1} alpha + V on T*Q.
MagneticHamiltonianSystem build_mechanical_hamiltonian(const MechanicalSpec& spec);

struct ThreeBodyParams {
  double I1 = 1.0;
  double I2 = 2.0;
  double I3 = 3.0;
  double c1 = 1.0;  ///< cos(phi)
  double c2 = 1.0;  ///< cos(psi)
  double c3 = 0.0;  ///< cos(phi - psi)

  void validate() const;
  double total() const { return I1 + I2 + I3; }
  Mat mass_matrix() const;
  MechanicalSpec spec() const;
};

/// Coordinates q = (theta, phi, psi); the symmetry translates theta.
struct ThreeBodyModel {
  ThreeBodyParams params;
  MagneticLagrangianSystem system;
  MagneticHamiltonianSystem hamiltonian;
  GroupAction action;
  Connection mechanical;  ///< dtheta + (I2+I3)/sum dphi + I3/sum dpsi
  Connection a0;          ///< dtheta + cos(psi) dphi
};

ThreeBodyModel build_three_body(const ThreeBodyParams& params);

/// State (theta, phi, psi, thetadot, phidot, psidot) with thetadot chosen so
/// that J = mu.
Vec three_body_state_on_level(const ThreeBodyParams& params, double theta, double phi, double psi,
                              double phidot, double psidot, double mu);

}  // namespace routh
