#include "routh/presym.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace routh {

PresymplecticSolution solve_presymplectic(const AntisymMatrix& omega, const Vec& dh,
                                          const PartialAssignment& gauge, bool require_consistent) {
  if (dh.size() != omega.dim()) throw Error(ErrorKind::InvalidArgument, "dh and omega differ in dimension");
  require_finite(dh, "dh");
  PresymplecticSolution out;
  out.data.omega = omega;
  out.data.dh = dh;
  out.data.kernel_basis = kernel_basis(omega.matrix());
  const double bound = kConsistencyTolerance * (1 + dh.norm());
  for (Eigen::Index c = 0; c < out.data.kernel_basis.cols(); ++c)
    if (std::abs(dh.dot(out.data.kernel_basis.col(c))) >= bound) out.data.consistent = false;
  if (!out.data.consistent && require_consistent)
    throw Error(ErrorKind::InconsistentDynamics, "dh does not annihilate ker omega");

  LsqResult lsq;
  try {
    lsq = constrained_lsq_solve(omega.matrix().transpose(), Vec(-dh), gauge);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InconsistentConstraint && require_consistent)
      throw Error(ErrorKind::InconsistentDynamics, "gauge pins are incompatible with the equation");
    throw;
  }
  out.solution = lsq.solution;
  out.gauge_basis = lsq.kernel_basis;
  out.residual = presymplectic_residual(omega, out.solution, dh);
  return out;
}

double presymplectic_residual(const AntisymMatrix& omega, const Vec& x, const Vec& dh) {
  return (omega.contract(x) + dh).cwiseAbs().maxCoeff();
}

Vec gauge_toward(const PresymplecticSolution& sol, const std::vector<int>& slots, const Vec& target) {
  if (static_cast<Eigen::Index>(slots.size()) != target.size())
    throw Error(ErrorKind::InvalidArgument, "slots and target differ in length");
  const Mat& k = sol.gauge_basis;
  if (k.cols() == 0 || slots.empty()) return sol.solution;
  Mat a(slots.size(), k.cols());
  Vec r(slots.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    a.row(i) = k.row(slots[i]);
    r[i] = target[i] - sol.solution[slots[i]];
  }
  const Vec c = a.completeOrthogonalDecomposition().solve(r);
  return sol.solution + k * c;
}

const char* to_string(GnhStatus status) {
  switch (status) {
    case GnhStatus::PrimaryConsistent: return "PRIMARY_CONSISTENT";
    case GnhStatus::SecondaryRequired: return "SECONDARY_REQUIRED";
    case GnhStatus::Unresolved: return "UNRESOLVED";
  }
  return "?";
}

GnhReport gnh_classify(const MagneticLagrangianSystem& sys, std::span<const Vec> states) {
  GnhReport report;
  std::vector<bool> consistent;
  std::map<int, int> histogram;
  for (const Vec& s : states) {
    const LagrangianJet jet = lagrangian_jet(sys, s);
    const AntisymMatrix omega = presymplectic_matrix(sys, s, jet);
    const Vec de = energy_differential(sys, s);
    const PresymplecticSolution sol = solve_presymplectic(omega, de, {}, false);
    const int kdim = static_cast<int>(sol.data.kernel_basis.cols());
    report.kernel_dim.push_back(kdim);
    consistent.push_back(sol.data.consistent);
    ++histogram[kdim];
  }
  int best = -1;
  for (const auto& [dim, count] : histogram)
    if (best < 0 || count > histogram[best]) best = dim;
  report.modal_kernel_dim = std::max(best, 0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    GnhStatus st = consistent[i] ? GnhStatus::PrimaryConsistent : GnhStatus::SecondaryRequired;
    if (report.kernel_dim[i] != report.modal_kernel_dim) st = GnhStatus::Unresolved;
    if (st != GnhStatus::PrimaryConsistent) report.final_constraint_manifold = false;
    report.status.push_back(st);
  }
  return report;
}

CompatibilityCheck check_f_related(const CompatibleTransformation& ct, const Vec& s1, const Vec& y,
                                   const Vec& s2, const Vec& x, double tol) {
  const TransformationPair& pr = ct.pair();
  CompatibilityCheck out = check_compatible_vectors(pr, s1, y, s2, x, tol);
  const Vec image = ct.apply(s1);
  const double vbar_gap = pr.k_f == 0 ? 0.0 : (image - s2).cwiseAbs().maxCoeff();
  out.defect = std::max(out.defect, vbar_gap);
  out.holds = out.defect <= tol;
  return out;
}

}  // namespace routh
