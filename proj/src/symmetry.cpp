#include "routh/symmetry.hpp"

#include <cmath>
#include <random>

namespace routh {

Mat GroupAction::generators(const Vec& x) const {
  if (x.size() != space_dim) throw Error(ErrorKind::InvalidArgument, "point does not match the action space");
  Mat s = sigma(x);
  if (s.rows() != space_dim || s.cols() != g_dim)
    throw Error(ErrorKind::InvalidArgument, "generator matrix has the wrong shape");
  if (!s.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "generator matrix");
  return s;
}

double GroupAction::structure_constant(int a, int b, int c) const {
  if (structure_constants.empty()) return 0.0;
  return structure_constants[(a * g_dim + b) * g_dim + c];
}

Vec GroupAction::bracket(const Vec& xi, const Vec& zeta) const {
  Vec out = Vec::Zero(g_dim);
  if (structure_constants.empty()) return out;
  for (int a = 0; a < g_dim; ++a)
    for (int b = 0; b < g_dim; ++b)
      for (int c = 0; c < g_dim; ++c) out[a] += structure_constant(a, b, c) * xi[b] * zeta[c];
  return out;
}

bool GroupAction::abelian() const {
  for (double c : structure_constants)
    if (c != 0.0) return false;
  return true;
}

GroupAction GroupAction::translations(int space_dim, std::vector<int> coords) {
  GroupAction a;
  a.g_dim = static_cast<int>(coords.size());
  a.space_dim = space_dim;
  a.translation_coords = coords;
  a.sigma = [space_dim, coords](const Vec&) {
    Mat s = Mat::Zero(space_dim, static_cast<Eigen::Index>(coords.size()));
    for (std::size_t b = 0; b < coords.size(); ++b) s(coords[b], b) = 1.0;
    return s;
  };
  return a;
}

void validate_action(const GroupAction& action) {
  if (action.g_dim < 0 || action.space_dim < 1)
    throw Error(ErrorKind::InvalidArgument, "action dimensions are invalid");
  if (!action.sigma) throw Error(ErrorKind::InvalidArgument, "action has no generator callback");
  const int g = action.g_dim;
  if (!action.structure_constants.empty()) {
    if (static_cast<int>(action.structure_constants.size()) != g * g * g)
      throw Error(ErrorKind::InvalidArgument, "structure constants need g^3 entries");
    for (int a = 0; a < g; ++a)
      for (int b = 0; b < g; ++b)
        for (int c = 0; c < g; ++c)
          if (action.structure_constant(a, b, c) != -action.structure_constant(a, c, b))
            throw Error(ErrorKind::InvalidArgument, "structure constants are not antisymmetric");
  }
  if (!action.translation_coords.empty()) {
    if (static_cast<int>(action.translation_coords.size()) != g)
      throw Error(ErrorKind::InvalidArgument, "one translation coordinate per generator is required");
    for (int c : action.translation_coords)
      if (c < 0 || c >= action.space_dim)
        throw Error(ErrorKind::InvalidArgument, "translation coordinate out of range");
  }
}

void check_free(const GroupAction& action, std::span<const Vec> points) {
  for (const Vec& x : points)
    if (numerical_rank(action.generators(x)) < action.g_dim)
      throw Error(ErrorKind::NotFreeAction, "generators are linearly dependent at a probe");
}

namespace {

// Q rows of the generator matrix evaluated at the state's point.
Mat q_generators(const BundleDims& dims, const GroupAction& action, const Vec& s) {
  const Vec x = action.space_dim == dims.n ? Vec(s.head(dims.n)) : point_of(dims, s);
  return action.generators(x).topRows(dims.n);
}

}  // namespace

Vec momentum_map(const MagneticLagrangianSystem& sys, const GroupAction& action, const Vec& s,
                 const BgPotential* delta) {
  if (action.space_dim != sys.dims.n && action.space_dim != sys.dims.point_dim())
    throw Error(ErrorKind::InvalidArgument, "action does not act on Q or P of this system");
  Vec j = q_generators(sys.dims, action, s).transpose() * fiber_derivative(sys, s);
  if (delta) j -= delta->delta.value(point_of(sys.dims, s));
  require_finite(j, "momentum map");
  return j;
}

GRegularityReport check_G_regular(const MagneticLagrangianSystem& sys, const GroupAction& action,
                                  std::span<const Vec> probes) {
  if (probes.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one probe");
  const int n = sys.dims.n;
  GRegularityReport report;
  for (const Vec& s : probes) {
    const Mat sig = q_generators(sys.dims, action, s);
    const Mat w = hessian(sys.lagrangian, s).block(n, n, n, n);
    Mat jac = sig.transpose() * w * sig;
    const double cond = condition_number(jac);
    report.jacobian.push_back(std::move(jac));
    report.condition.push_back(cond);
    if (!std::isfinite(cond)) report.regular = false;
  }
  return report;
}

std::vector<Mat> Connection::derivatives(const Vec& q) const {
  if (derivative) return derivative(q);
  std::vector<Mat> out(q.size());
  Vec x = q;
  for (Eigen::Index c = 0; c < q.size(); ++c) {
    x[c] = q[c] + fd_step;
    const Mat ap = coefficients(x);
    x[c] = q[c] - fd_step;
    const Mat am = coefficients(x);
    x[c] = q[c];
    out[c] = (ap - am) / (2 * fd_step);
  }
  return out;
}

double connection_defect(const Connection& conn, const GroupAction& action, std::span<const Vec> probes) {
  double worst = 0.0;
  for (const Vec& q : probes) {
    const Mat sig = action.generators(q).topRows(conn.n);
    const Mat gap = conn(q) * sig - Mat::Identity(conn.g_dim, conn.g_dim);
    worst = std::max(worst, gap.cwiseAbs().maxCoeff());
  }
  return worst;
}

Connection mechanical_connection(const MagneticLagrangianSystem& sys, const GroupAction& action) {
  if (sys.dims.k != 0) throw Error(ErrorKind::InvalidArgument, "mechanical connection needs a system on TQ");
  if (action.space_dim != sys.dims.n) throw Error(ErrorKind::InvalidArgument, "action must act on Q");
  const int n = sys.dims.n;
  const ScalarField l = sys.lagrangian;
  auto metric = [l, n](const Vec& q) {
    Vec s = Vec::Zero(2 * n);
    s.head(n) = q;
    Mat w = hessian(l, s).block(n, n, n, n);
    w = 0.5 * (w + w.transpose());
    Eigen::LLT<Mat> llt(w);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotMechanical, "velocity Hessian is not positive definite");
    // Mechanical type: the metric must not depend on v.
    Vec s1 = s;
    s1.tail(n).setOnes();
    const Mat w1 = hessian(l, s1).block(n, n, n, n);
    if ((w1 - w).cwiseAbs().maxCoeff() > 1e-6 * (1 + w.cwiseAbs().maxCoeff()))
      throw Error(ErrorKind::NotMechanical, "velocity Hessian depends on the velocities");
    return w;
  };
  // Reject non-mechanical input at construction rather than at first use.
  std::mt19937_64 rng(0x6d65);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  metric(Vec::Zero(n));
  for (int i = 0; i < 4; ++i) metric(Vec::NullaryExpr(n, [&] { return u(rng); }));

  const GroupAction act = action;
  Connection c;
  c.n = n;
  c.g_dim = action.g_dim;
  c.coefficients = [metric, act](const Vec& q) {
    const Mat w = metric(q);
    const Mat sig = act.generators(q);
    const Mat locked = sig.transpose() * w * sig;
    Eigen::LLT<Mat> llt(locked);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::SingularJacobian, "locked inertia is singular");
    return Mat(llt.solve(sig.transpose() * w));
  };
  return c;
}

ContractedConnection connection_one_form_mu(const Connection& conn, const Vec& mu, const Vec& q) {
  if (mu.size() != conn.g_dim) throw Error(ErrorKind::InvalidArgument, "mu has the wrong length");
  require_finite(mu, "mu");
  VectorField form;
  form.value = [conn, mu](const Vec& x) { return Vec(conn(x).transpose() * mu); };
  form.jacobian = [conn, mu](const Vec& x) {
    const std::vector<Mat> d = conn.derivatives(x);
    Mat j(conn.n, x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) j.col(c) = d[c].transpose() * mu;
    return j;
  };
  ContractedConnection out{form.value(q), exterior_derivative(form, q)};
  require_finite(out.covector, "contracted connection");
  return out;
}

BgPotentialReport verify_bg_potential(const TwoFormField& b, const GroupAction& action, const BgPotential& delta,
                                      std::span<const Vec> probes) {
  BgPotentialReport report;
  for (const Vec& x : probes) {
    const Mat sig = action.generators(x);
    const Mat bx = b(x).matrix();
    const Mat dd = jacobian(delta.delta, x);  // row b is d delta_b
    for (int g = 0; g < action.g_dim; ++g) {
      const Vec ixb = bx.transpose() * sig.col(g);
      report.max_violation = std::max(report.max_violation, (ixb - dd.row(g).transpose()).cwiseAbs().maxCoeff());
    }
    ++report.probes;
  }
  return report;
}

Mat infinitesimal_cocycle(const GroupAction& action, const BgPotential& delta, const Vec& point) {
  const int g = action.g_dim;
  const Mat sig = action.generators(point);
  const Mat dd = jacobian(delta.delta, point);
  const Vec d = delta.delta.value(point);
  Mat out(g, g);
  for (int a = 0; a < g; ++a)
    for (int b = 0; b < g; ++b) {
      double br = 0.0;
      for (int c = 0; c < g; ++c) br += action.structure_constant(c, a, b) * d[c];
      out(a, b) = -dd.row(b).dot(sig.col(a)) - br;
    }
  return out;
}

double invariance_defect(const MagneticLagrangianSystem& sys, const GroupAction& action,
                         std::span<const Vec> probes) {
  if (action.translation_coords.empty())
    throw Error(ErrorKind::InvalidArgument, "invariance check needs translation coordinates");
  double worst = 0.0;
  for (const Vec& s : probes) {
    const Vec g = gradient(sys.lagrangian, s);
    // Translation coordinates index the action space; on P the p part sits
    // after the velocities in the state.
    for (int c : action.translation_coords) {
      const int slot = c < sys.dims.n ? c : sys.dims.n + c;
      worst = std::max(worst, std::abs(g[slot]));
    }
  }
  return worst;
}

}  // namespace routh
