#include "routh/lagrangian.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace routh {

void Trajectory::validate() const {
  if (times.size() != states.size())
    throw Error(ErrorKind::InvalidArgument, "trajectory times and states differ in length");
  for (std::size_t i = 1; i < states.size(); ++i)
    if (states[i].size() != states[0].size())
      throw Error(ErrorKind::InvalidArgument, "trajectory states have inconsistent lengths");
  const double h = step();
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs((times[i] - times[i - 1]) - h) > 1e-12)
      throw Error(ErrorKind::InvalidArgument, "trajectory time step is not uniform");
}

std::vector<double> Trajectory::component(int i) const {
  std::vector<double> out;
  out.reserve(states.size());
  for (const Vec& s : states) out.push_back(s[i]);
  return out;
}

double angle_difference(double a, double b) {
  return std::remainder(a - b, 2 * std::numbers::pi);
}

// ---------------------------------------------------------------------------

BundleDims::BundleDims(int n_, int k_) : n(n_), k(k_) {
  if (n < 1 || k < 0) throw Error(ErrorKind::InvalidArgument, "bundle dimensions need n >= 1, k >= 0");
}

Vec StateTPQ::pack() const {
  Vec s(q.size() + v.size() + p.size());
  s << q, v, p;
  return s;
}

StateTPQ StateTPQ::unpack(const BundleDims& dims, const Vec& s) {
  validate_state(dims, s);
  return {s.head(dims.n), s.segment(dims.n, dims.n), s.tail(dims.k)};
}

void validate_state(const BundleDims& dims, const Vec& s) {
  if (s.size() != dims.state_dim())
    throw Error(ErrorKind::InvalidArgument, "state length does not match bundle dimensions");
  require_finite(s, "state");
}

Vec point_of(const BundleDims& dims, const Vec& s) {
  Vec pt(dims.point_dim());
  pt << s.head(dims.n), s.tail(dims.k);
  return pt;
}

TwoFormField TwoFormField::zero(int dim) {
  TwoFormField b;
  b.dim = dim;
  b.value = [dim](const Vec&) { return AntisymMatrix::zero(dim); };
  b.zero_ = true;
  return b;
}

TwoFormField TwoFormField::from(int dim, std::function<AntisymMatrix(const Vec&)> fn) {
  TwoFormField b;
  b.dim = dim;
  b.value = std::move(fn);
  return b;
}

double closedness_defect(const TwoFormField& b, std::span<const Vec> points) {
  double worst = 0.0;
  if (b.is_identically_zero()) return worst;
  const int d = b.dim;
  for (const Vec& x : points) {
    // derivs[c] = dB/dx^c
    std::vector<Mat> derivs(d);
    Vec y = x;
    for (int c = 0; c < d; ++c) {
      y[c] = x[c] + b.fd_step;
      const Mat bp = b(y).matrix();
      y[c] = x[c] - b.fd_step;
      const Mat bm = b(y).matrix();
      y[c] = x[c];
      derivs[c] = (bp - bm) / (2 * b.fd_step);
    }
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int k = j + 1; k < d; ++k)
          worst = std::max(worst, std::abs(derivs[i](j, k) + derivs[j](k, i) + derivs[k](i, j)));
  }
  return worst;
}

AntisymMatrix exterior_derivative(const VectorField& one_form, const Vec& point) {
  const Mat jac = jacobian(one_form, point);  // jac(d, c) = d_c w_d
  return AntisymMatrix(2.0 * jac.transpose());
}

// ---------------------------------------------------------------------------

MagneticLagrangianSystem::MagneticLagrangianSystem(BundleDims dims_, ScalarField lagrangian_,
                                                   TwoFormField magnetic_, std::vector<int> periodic,
                                                   std::string id_)
    : dims(dims_),
      lagrangian(std::move(lagrangian_)),
      magnetic(std::move(magnetic_)),
      periodic_coords(std::move(periodic)),
      id(std::move(id_)) {
  if (!lagrangian.value) throw Error(ErrorKind::InvalidArgument, "lagrangian has no value callback");
  if (!magnetic.value) magnetic = TwoFormField::zero(dims.point_dim());
  if (magnetic.dim != dims.point_dim())
    throw Error(ErrorKind::InvalidArgument, "magnetic form dimension must equal dim P");
  for (int c : periodic_coords)
    if (c < 0 || c >= dims.n) throw Error(ErrorKind::InvalidArgument, "periodic index out of range");
}

MagneticLagrangianSystem MagneticLagrangianSystem::finite_difference_copy() const {
  MagneticLagrangianSystem copy = *this;
  copy.lagrangian = lagrangian.without_exact_derivatives();
  return copy;
}

LagrangianJet lagrangian_jet(const MagneticLagrangianSystem& sys, const Vec& s) {
  validate_state(sys.dims, s);
  LagrangianJet jet;
  jet.value = sys.lagrangian.value(s);
  require_finite(jet.value, "lagrangian value");
  jet.gradient = gradient(sys.lagrangian, s);
  jet.hessian = hessian(sys.lagrangian, s);
  return jet;
}

Vec fiber_derivative(const MagneticLagrangianSystem& sys, const Vec& s) {
  validate_state(sys.dims, s);
  return gradient(sys.lagrangian, s).segment(sys.dims.n, sys.dims.n);
}

double energy(const MagneticLagrangianSystem& sys, const Vec& s) {
  validate_state(sys.dims, s);
  const int n = sys.dims.n;
  const Vec alpha = gradient(sys.lagrangian, s).segment(n, n);
  const double e = alpha.dot(s.segment(n, n)) - sys.lagrangian.value(s);
  require_finite(e, "energy");
  return e;
}

namespace {

Vec energy_differential_from(const BundleDims& dims, const Vec& s, const LagrangianJet& jet) {
  // dE = v^i d(dL/dv^i) - dL + alpha_i dv^i, and the last term cancels the
  // v-part of dL.
  const int n = dims.n;
  const Vec v = s.segment(n, n);
  Vec de = jet.hessian.middleRows(n, n).transpose() * v;
  de.head(n) -= jet.gradient.head(n);
  de.tail(dims.k) -= jet.gradient.tail(dims.k);
  return de;
}

}  // namespace

Vec energy_differential(const MagneticLagrangianSystem& sys, const Vec& s) {
  return energy_differential_from(sys.dims, s, lagrangian_jet(sys, s));
}

AntisymMatrix presymplectic_matrix(const MagneticLagrangianSystem& sys, const Vec& s) {
  return presymplectic_matrix(sys, s, lagrangian_jet(sys, s));
}

AntisymMatrix presymplectic_matrix(const MagneticLagrangianSystem& sys, const Vec& s,
                                   const LagrangianJet& jet) {
  const int n = sys.dims.n;
  const int k = sys.dims.k;
  const Mat& h = jet.hessian;
  // Blocks of the Hessian rows belonging to v.
  const Mat c = h.block(n, 0, n, n);      // C_ij = d2L / dv^i dq^j
  const Mat w = h.block(n, n, n, n);      // W_ij
  const Mat d = h.block(n, 2 * n, n, k);  // D_ia
  const Mat b = sys.magnetic(point_of(sys.dims, s)).matrix();

  Mat omega = Mat::Zero(2 * n + k, 2 * n + k);
  // (q, q)
  omega.block(0, 0, n, n) = c.transpose() - c + b.block(0, 0, n, n);
  // (v, q): Omega(dv^k, dq^l) = W_lk
  omega.block(n, 0, n, n) = w.transpose();
  omega.block(0, n, n, n) = -w;
  // (q, p)
  omega.block(0, 2 * n, n, k) = -d + b.block(0, n, n, k);
  omega.block(2 * n, 0, k, n) = -omega.block(0, 2 * n, n, k).transpose();
  // (p, p)
  omega.block(2 * n, 2 * n, k, k) = b.block(n, n, k, k);
  if (!omega.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "presymplectic matrix");
  return AntisymMatrix(omega);
}

ElField el_vector_field(const MagneticLagrangianSystem& sys, const Vec& s, GaugePolicy policy) {
  const LagrangianJet jet = lagrangian_jet(sys, s);
  const AntisymMatrix omega = presymplectic_matrix(sys, s, jet);
  const Vec de = energy_differential_from(sys.dims, s, jet);
  const int n = sys.dims.n;

  // First step of the constraint algorithm: dE must annihilate ker Omega.
  const Mat ker = kernel_basis(omega.matrix());
  for (Eigen::Index c = 0; c < ker.cols(); ++c)
    if (std::abs(de.dot(ker.col(c))) > kConsistencyTolerance * (1 + de.norm()))
      throw Error(ErrorKind::InconsistentDynamics, "dE does not annihilate ker Omega");

  PartialAssignment sode;
  sode.reserve(n);
  for (int i = 0; i < n; ++i) sode.emplace_back(i, s[n + i]);

  LsqResult sol;
  try {
    sol = constrained_lsq_solve(omega.matrix().transpose(), Vec(-de), sode);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InconsistentConstraint)
      throw Error(ErrorKind::InconsistentDynamics, "second-order gauge is incompatible with the EL equation");
    throw;
  }
  ElField field{sol.solution, static_cast<int>(sol.kernel_basis.cols()), sol.kernel_basis};
  if (field.kernel_dim > 0 && policy == GaugePolicy::Strict)
    throw AmbiguousDynamicsError("EL equation leaves (vdot, pdot) undetermined", sol.kernel_basis);
  // x_q = v holds exactly: pinned slots are copied.
  return field;
}

ResidualSeries el_residual(const MagneticLagrangianSystem& sys, const Trajectory& traj) {
  traj.validate();
  const std::size_t count = traj.size();
  if (count < 5) throw Error(ErrorKind::TooShort, "need at least five samples for the stencil");
  const double h = traj.step();
  const auto& x = traj.states;
  ResidualSeries out;
  out.per_sample.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vec xdot;
    if (k >= 2 && k + 2 < count) {
      xdot = (x[k - 2] - 8 * x[k - 1] + 8 * x[k + 1] - x[k + 2]) / (12 * h);
    } else if (k == 0) {
      xdot = (-25 * x[0] + 48 * x[1] - 36 * x[2] + 16 * x[3] - 3 * x[4]) / (12 * h);
    } else if (k == 1) {
      xdot = (-3 * x[0] - 10 * x[1] + 18 * x[2] - 6 * x[3] + x[4]) / (12 * h);
    } else if (k == count - 1) {
      const std::size_t e = count - 1;
      xdot = (3 * x[e - 4] - 16 * x[e - 3] + 36 * x[e - 2] - 48 * x[e - 1] + 25 * x[e]) / (12 * h);
    } else {
      const std::size_t e = count - 1;
      xdot = (-x[e - 4] + 6 * x[e - 3] - 18 * x[e - 2] + 10 * x[e - 1] + 3 * x[e]) / (12 * h);
    }
    const LagrangianJet jet = lagrangian_jet(sys, x[k]);
    const AntisymMatrix omega = presymplectic_matrix(sys, x[k], jet);
    const Vec r = omega.contract(xdot) + energy_differential_from(sys.dims, x[k], jet);
    out.per_sample[k] = r.cwiseAbs().maxCoeff();
    if (out.per_sample[k] > out.max) {
      out.max = out.per_sample[k];
      out.argmax = k;
    }
  }
  return out;
}

HyperregularReport check_hyperregular(const MagneticLagrangianSystem& sys, std::span<const Vec> probes) {
  if (probes.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one probe");
  const int n = sys.dims.n;
  HyperregularReport report;
  for (const Vec& s : probes) {
    const LagrangianJet jet = lagrangian_jet(sys, s);
    const double cond = condition_number(jet.hessian.block(n, n, n, n));
    report.velocity_hessian_condition.push_back(cond);
    if (!std::isfinite(cond)) report.regular = false;
    const Mat omega = presymplectic_matrix(sys, s, jet).matrix();
    const int kdim = static_cast<int>(omega.rows()) - numerical_rank(omega);
    report.omega_kernel_dim.push_back(kdim);
    if (kdim > 0) report.nondegenerate = false;
  }
  return report;
}

// ---------------------------------------------------------------------------

Vec permute_state(const Vec& s, const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  Vec out(2 * n);
  for (int j = 0; j < n; ++j) {
    out[j] = s[order[j]];
    out[n + j] = s[n + order[j]];
  }
  return out;
}

Vec unpermute_state(const Vec& s, const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  Vec out(2 * n);
  for (int j = 0; j < n; ++j) {
    out[order[j]] = s[j];
    out[n + order[j]] = s[n + j];
  }
  return out;
}

MagneticLagrangianSystem permute_coordinates(const MagneticLagrangianSystem& sys,
                                             const std::vector<int>& order) {
  const int n = sys.dims.n;
  if (sys.dims.k != 0) throw Error(ErrorKind::InvalidArgument, "coordinate permutation needs k == 0");
  if (static_cast<int>(order.size()) != n)
    throw Error(ErrorKind::InvalidArgument, "permutation length must equal n");
  std::vector<bool> seen(n, false);
  for (int o : order) {
    if (o < 0 || o >= n || seen[o]) throw Error(ErrorKind::InvalidArgument, "not a permutation");
    seen[o] = true;
  }
  // Index map on the flat state: new slot -> old slot.
  std::vector<int> slot(2 * n);
  for (int j = 0; j < n; ++j) {
    slot[j] = order[j];
    slot[n + j] = n + order[j];
  }
  auto to_old = [order](const Vec& s) { return unpermute_state(s, order); };

  const ScalarField& l = sys.lagrangian;
  ScalarField lp;
  lp.fd_step = l.fd_step;
  lp.fd_hessian_step = l.fd_hessian_step;
  lp.value = [l, to_old](const Vec& s) { return l.value(to_old(s)); };
  if (l.gradient)
    lp.gradient = [l, to_old, slot](const Vec& s) {
      const Vec g = l.gradient(to_old(s));
      Vec out(g.size());
      for (std::size_t i = 0; i < slot.size(); ++i) out[i] = g[slot[i]];
      return out;
    };
  if (l.hessian)
    lp.hessian = [l, to_old, slot](const Vec& s) {
      const Mat h = l.hessian(to_old(s));
      Mat out(h.rows(), h.cols());
      for (std::size_t i = 0; i < slot.size(); ++i)
        for (std::size_t j = 0; j < slot.size(); ++j) out(i, j) = h(slot[i], slot[j]);
      return out;
    };

  TwoFormField bp;
  if (sys.magnetic.is_identically_zero()) {
    bp = TwoFormField::zero(n);
  } else {
    const TwoFormField b = sys.magnetic;
    bp = TwoFormField::from(n, [b, order, n](const Vec& q) {
      Vec old(n);
      for (int j = 0; j < n; ++j) old[order[j]] = q[j];
      const Mat m = b(old).matrix();
      Mat out(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = m(order[i], order[j]);
      return AntisymMatrix(out);
    });
  }
  std::vector<int> periodic;
  for (int j = 0; j < n; ++j)
    for (int c : sys.periodic_coords)
      if (order[j] == c) periodic.push_back(j);
  return MagneticLagrangianSystem(sys.dims, std::move(lp), std::move(bp), std::move(periodic),
                                  sys.id + ":permuted");
}

}  // namespace routh
