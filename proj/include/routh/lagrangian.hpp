#pragma once

// Magnetic Lagrangian systems on fiber products T_P Q in adapted
// coordinates. A state is the flat vector (q[0..n), v[0..n), p[0..k)); a
// point of P is (q, p).

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "routh/numcore.hpp"
#include "routh/trajectory.hpp"

namespace routh {

struct BundleDims {
  int n = 1;  ///< dim Q
  int k = 0;  ///< fiber dimension of P -> Q

  BundleDims() = default;
  BundleDims(int n_, int k_);

  int state_dim() const { return 2 * n + k; }
  int point_dim() const { return n + k; }
  bool operator==(const BundleDims&) const = default;
};

/// Component view of a state; the flat vector is what the operations take.
struct StateTPQ {
  Vec q;
  Vec v;
  Vec p;

  Vec pack() const;
  static StateTPQ unpack(const BundleDims& dims, const Vec& s);
};

/// Throws InvalidArgument on a length mismatch and NonFiniteEvaluation on
/// non-finite entries.
void validate_state(const BundleDims& dims, const Vec& s);

/// (q, p) part of a state.
Vec point_of(const BundleDims& dims, const Vec& s);

/// 2-form field on P, given pointwise as an antisymmetric matrix in the
/// (dq, dp) basis: entry (i, j) is B(e_i, e_j).
struct TwoFormField {
  int dim = 0;
  std::function<AntisymMatrix(const Vec&)> value;
  double fd_step = 1e-6;

  AntisymMatrix operator()(const Vec& point) const { return value(point); }
  bool is_identically_zero() const { return zero_; }

  static TwoFormField zero(int dim);
  static TwoFormField from(int dim, std::function<AntisymMatrix(const Vec&)> fn);

 private:
  bool zero_ = false;
};

/// Max |dB(e_a, e_b, e_c)| over probes, dB computed by central differences.
double closedness_defect(const TwoFormField& b, std::span<const Vec> points);

/// Exterior derivative of a 1-form given by its coefficient field:
/// entry (c, d) is d_c w_d - d_d w_c.
AntisymMatrix exterior_derivative(const VectorField& one_form, const Vec& point);

struct MagneticLagrangianSystem {
  BundleDims dims;
  ScalarField lagrangian;
  TwoFormField magnetic;
  std::vector<int> periodic_coords;  ///< indices of q identified modulo 2 pi
  std::string id;

  MagneticLagrangianSystem() = default;
  MagneticLagrangianSystem(BundleDims dims, ScalarField lagrangian, TwoFormField magnetic = {},
                           std::vector<int> periodic = {}, std::string id = {});

  /// Copy with L (and B when it is not the zero form) stripped of exact
  /// derivative callbacks.
  MagneticLagrangianSystem finite_difference_copy() const;
};

/// First and second derivatives of L at one state, shared by the operations
/// below.
struct LagrangianJet {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};
LagrangianJet lagrangian_jet(const MagneticLagrangianSystem& sys, const Vec& s);

/// alpha_i = dL/dv^i.
Vec fiber_derivative(const MagneticLagrangianSystem& sys, const Vec& s);

/// E = v . dL/dv - L.
double energy(const MagneticLagrangianSystem& sys, const Vec& s);
Vec energy_differential(const MagneticLagrangianSystem& sys, const Vec& s);

/// Omega^{L,B} at s in the (dq, dv, dp) basis. With C_ij = d2L/dq^j dv^i,
/// W_ij = d2L/dv^j dv^i and D_ia = d2L/dp^a dv^i:
///   Omega(dq^k, dq^l) = C_lk - C_kl + B_kl,   Omega(dv^k, dq^l) = W_lk,
///   Omega(dq^l, dp^b) = -D_lb + B_lb,         Omega(dp^a, dp^b) = B_ab,
/// and zero on (v, v) and (v, p).
AntisymMatrix presymplectic_matrix(const MagneticLagrangianSystem& sys, const Vec& s);
AntisymMatrix presymplectic_matrix(const MagneticLagrangianSystem& sys, const Vec& s,
                                   const LagrangianJet& jet);

enum class GaugePolicy {
  Strict,         ///< remaining gauge freedom raises AmbiguousDynamics
  MinimumNorm,    ///< remaining gauge freedom is resolved by the minimum-norm solution
};

struct ElField {
  Vec xdot;
  int kernel_dim = 0;
  Mat kernel_basis;
};

/// Solves i_X Omega = -dE with the second-order gauge x_q = v pinned.
/// Throws InconsistentDynamics when <dE, ker Omega> != 0 and, under
/// GaugePolicy::Strict, AmbiguousDynamics when (vdot, pdot) stay undetermined.
ElField el_vector_field(const MagneticLagrangianSystem& sys, const Vec& s,
                        GaugePolicy policy = GaugePolicy::Strict);

struct ResidualSeries {
  std::vector<double> per_sample;
  double max = 0.0;
  std::size_t argmax = 0;
};

/// ||i_gdot Omega + dE||_inf along a uniformly sampled trajectory, with the
/// velocity gdot from five-point fourth-order differences (one-sided at the
/// ends). Throws TooShort below five samples.
ResidualSeries el_residual(const MagneticLagrangianSystem& sys, const Trajectory& traj);

struct HyperregularReport {
  std::vector<double> velocity_hessian_condition;  ///< cond(W) per probe
  std::vector<int> omega_kernel_dim;
  bool regular = true;        ///< W invertible at every probe
  bool nondegenerate = true;  ///< Omega of full rank at every probe
  bool hyperregular() const { return regular && nondegenerate; }
};
HyperregularReport check_hyperregular(const MagneticLagrangianSystem& sys, std::span<const Vec> probes);

/// Relabelled copy of a system with k == 0: new coordinate j is old
/// coordinate order[j] (velocities follow). Exact derivatives are carried over.
MagneticLagrangianSystem permute_coordinates(const MagneticLagrangianSystem& sys,
                                             const std::vector<int>& order);

/// State permutation matching permute_coordinates for k == 0 systems.
Vec permute_state(const Vec& s, const std::vector<int>& order);
Vec unpermute_state(const Vec& s, const std::vector<int>& order);

}  // namespace routh
