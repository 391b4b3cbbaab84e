#pragma once

// Presymplectic equations i_X omega = -dh at single points, pointwise
// classification against the first step of the constraint algorithm, and
// f-relatedness of vectors across a compatible transformation.

#include <span>
#include <vector>

#include "routh/lagrangian.hpp"
#include "routh/transform.hpp"

namespace routh {

struct PresymplecticPointData {
  AntisymMatrix omega;
  Vec dh;
  Mat kernel_basis;  ///< orthonormal basis of ker omega
  bool consistent = true;
};

struct PresymplecticSolution {
  PresymplecticPointData data;
  Vec solution;
  Mat gauge_basis;  ///< remaining freedom after the gauge pins (zero on pins)
  double residual = 0.0;  ///< ||i_X omega + dh||_inf
};

/// Solves i_X omega = -dh with optional pinned components. Throws
/// InconsistentDynamics when dh does not annihilate ker omega and
/// `require_consistent` is set.
PresymplecticSolution solve_presymplectic(const AntisymMatrix& omega, const Vec& dh,
                                          const PartialAssignment& gauge = {},
                                          bool require_consistent = true);

/// ||i_x omega + dh||_inf.
double presymplectic_residual(const AntisymMatrix& omega, const Vec& x, const Vec& dh);

/// Moves a solution along its gauge basis so that the components listed in
/// `slots` come as close as possible (least squares) to `target`.
Vec gauge_toward(const PresymplecticSolution& sol, const std::vector<int>& slots, const Vec& target);

enum class GnhStatus { PrimaryConsistent, SecondaryRequired, Unresolved };
const char* to_string(GnhStatus status);

struct GnhReport {
  std::vector<GnhStatus> status;
  std::vector<int> kernel_dim;
  int modal_kernel_dim = 0;
  /// Every sampled point passed the first-step test.
  bool final_constraint_manifold = true;
};

/// Pointwise first-step test <dE, ker Omega> = 0 for each state. Points whose
/// Omega rank differs from the modal rank over the sample are reported as
/// Unresolved.
GnhReport gnh_classify(const MagneticLagrangianSystem& sys, std::span<const Vec> states);

/// Compatibility of Y at s1 with X at s2 = psi(s1). A mismatch of the shared
/// (q, qbar, v, pbar) point coordinates throws NotCompatiblePoints; a
/// mismatch of the vbar coordinate of s2 against psi(s1) enters the defect.
CompatibilityCheck check_f_related(const CompatibleTransformation& ct, const Vec& s1, const Vec& y,
                                   const Vec& s2, const Vec& x, double tol = 1e-8);

}  // namespace routh
