#include "routh/transform.hpp"

#include <cmath>

namespace routh {

namespace {

// Slot offsets of the three coordinate layouts.
struct Layout {
  int n, kf, m, kF;
  // s1 = (q, v, qbar, pbar, p)
  int s1_v() const { return n; }
  int s1_qb() const { return 2 * n; }
  int s1_pb() const { return 2 * n + kf; }
  int s1_p() const { return 2 * n + kf + m; }
  int s1_dim() const { return 2 * n + kf + m + kF; }
  // s2 = (q, qbar, v, vbar, pbar)
  int s2_qb() const { return n; }
  int s2_v() const { return n + kf; }
  int s2_vb() const { return 2 * n + kf; }
  int s2_pb() const { return 2 * n + 2 * kf; }
  int s2_dim() const { return 2 * n + 2 * kf + m; }
  // y = (q, qbar, pbar, p)
  int y_dim() const { return n + kf + m + kF; }
  int q2_dim() const { return n + kf; }
};

Layout layout_of(const TransformationPair& p) { return {p.n, p.k_f, p.m, p.k_F}; }

// y = P s1.
Mat p1_selection(const Layout& l) {
  Mat p = Mat::Zero(l.y_dim(), l.s1_dim());
  for (int i = 0; i < l.n; ++i) p(i, i) = 1.0;
  for (int i = 0; i < l.kf + l.m + l.kF; ++i) p(l.n + i, l.s1_qb() + i) = 1.0;
  return p;
}

// vbar slots of s2.
Mat vbar_embedding(const Layout& l) {
  Mat e = Mat::Zero(l.s2_dim(), l.kf);
  for (int a = 0; a < l.kf; ++a) e(l.s2_vb() + a, a) = 1.0;
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------

TransformationPair::TransformationPair(int n_, int k_f_, int m_, int k_F_)
    : n(n_), k_f(k_f_), m(m_), k_F(k_F_) {
  if (n < 1 || k_f < 0 || m < 0 || k_F < 0)
    throw Error(ErrorKind::InvalidArgument, "transformation pair needs n >= 1 and non-negative fibers");
}

Vec TransformationPair::p1_point(const Vec& s1) const {
  return point_of(dims1(), s1);
}

Vec TransformationPair::q2_point(const Vec& s1) const {
  const Layout l = layout_of(*this);
  Vec q2(l.q2_dim());
  q2 << s1.head(n), s1.segment(l.s1_qb(), k_f);
  return q2;
}

Vec TransformationPair::lift(const Vec& s1, const Vec& vbar) const {
  const Layout l = layout_of(*this);
  if (s1.size() != l.s1_dim()) throw Error(ErrorKind::InvalidArgument, "s1 has the wrong length");
  if (vbar.size() != k_f) throw Error(ErrorKind::InvalidArgument, "vbar has the wrong length");
  Vec s2(l.s2_dim());
  s2 << s1.head(n), s1.segment(l.s1_qb(), k_f), s1.segment(n, n), vbar, s1.segment(l.s1_pb(), m);
  return s2;
}

Vec TransformationPair::shared_of_s1(const Vec& s1) const {
  const Layout l = layout_of(*this);
  return s1.head(l.s1_p());
}

Vec TransformationPair::shared_of_s2(const Vec& s2) const {
  const Layout l = layout_of(*this);
  if (s2.size() != l.s2_dim()) throw Error(ErrorKind::InvalidArgument, "s2 has the wrong length");
  Vec out(l.s1_p());
  out << s2.head(n), s2.segment(l.s2_v(), n), s2.segment(l.s2_qb(), k_f), s2.segment(l.s2_pb(), m);
  return out;
}

Vec TransformationPair::project(const Vec& s2, const Vec& p) const {
  if (p.size() != k_F) throw Error(ErrorKind::InvalidArgument, "p has the wrong length");
  const Vec shared = shared_of_s2(s2);
  Vec s1(shared.size() + k_F);
  s1 << shared, p;
  return s1;
}

// ---------------------------------------------------------------------------

std::vector<Mat> FiberConnection::derivatives(const Vec& q2) const {
  if (derivative) return derivative(q2);
  std::vector<Mat> out(q2.size());
  Vec x = q2;
  for (Eigen::Index c = 0; c < q2.size(); ++c) {
    x[c] = q2[c] + fd_step;
    const Mat gp = gamma(x);
    x[c] = q2[c] - fd_step;
    const Mat gm = gamma(x);
    x[c] = q2[c];
    out[c] = (gp - gm) / (2 * fd_step);
  }
  return out;
}

FiberConnection FiberConnection::without_exact_derivatives() const {
  FiberConnection copy = *this;
  copy.derivative = nullptr;
  return copy;
}

FiberConnection FiberConnection::flat(int n, int k_f) {
  FiberConnection c;
  c.n = n;
  c.k_f = k_f;
  c.gamma = [n, k_f](const Vec&) { return Mat(Mat::Zero(k_f, n)); };
  c.derivative = [n, k_f](const Vec& q2) {
    return std::vector<Mat>(q2.size(), Mat::Zero(k_f, n));
  };
  return c;
}

FRegularityReport check_f_regular(const MagneticLagrangianSystem& sys2, const TransformationPair& pair,
                                  std::span<const Vec> probes) {
  if (sys2.dims != pair.dims2())
    throw Error(ErrorKind::InvalidArgument, "system does not live on T_{P2} Q2 of this pair");
  const Layout l = layout_of(pair);
  FRegularityReport report;
  for (const Vec& s2 : probes) {
    validate_state(sys2.dims, s2);
    const Mat huu = hessian(sys2.lagrangian, s2).block(l.s2_vb(), l.s2_vb(), l.kf, l.kf);
    report.determinant.push_back(l.kf == 0 ? 1.0 : huu.determinant());
    const double cond = l.kf == 0 ? 1.0 : condition_number(huu);
    report.condition.push_back(cond);
    if (!std::isfinite(cond)) report.f_regular = false;
  }
  return report;
}

// ---------------------------------------------------------------------------

CompatibleTransformation::CompatibleTransformation(TransformationPair pair, MagneticLagrangianSystem source,
                                                   BetaMap beta, FiberConnection connection,
                                                   NewtonOptions newton)
    : pair_(pair),
      source_(std::move(source)),
      beta_(std::move(beta)),
      connection_(std::move(connection)),
      newton_(newton) {
  if (source_.dims != pair_.dims2())
    throw Error(ErrorKind::InvalidArgument, "L2 must live on T_{P2} Q2 of the pair");
  if (!beta_.beta.value) throw Error(ErrorKind::InvalidArgument, "beta has no value callback");
  if (!connection_.gamma) throw Error(ErrorKind::InvalidArgument, "connection has no coefficient callback");
  if (connection_.n != pair_.n || connection_.k_f != pair_.k_f)
    throw Error(ErrorKind::InvalidArgument, "connection dimensions do not match the pair");
}

Vec CompatibleTransformation::solve_vbar(const Vec& s1, const Vec* guess) const {
  validate_state(pair_.dims1(), s1);
  const Layout l = layout_of(pair_);
  const Vec y = pair_.p1_point(s1);
  const Vec target = beta_(y);
  require_finite(target, "beta");
  if (l.kf == 0) return Vec(0);

  auto residual = [&](const Vec& u) -> Vec {
    return gradient(source_.lagrangian, pair_.lift(s1, u)).segment(l.s2_vb(), l.kf) - target;
  };
  auto jac = [&](const Vec& u) -> Mat {
    return hessian(source_.lagrangian, pair_.lift(s1, u)).block(l.s2_vb(), l.s2_vb(), l.kf, l.kf);
  };
  Vec x0 = guess ? *guess : Vec(-connection_(pair_.q2_point(s1)) * s1.segment(l.n, l.n));
  // A finite-difference momentum is only accurate to ~1e-10, so a tighter
  // tolerance cannot be met.
  NewtonOptions opts = newton_;
  if (!source_.lagrangian.has_exact_gradient()) opts.tol = std::max(opts.tol, 1e-9);
  NewtonResult res = newton_solve(residual, jac, x0, opts);
  // One polishing step; for quadratic velocity dependence it is exact.
  const Vec r = residual(res.x);
  const Mat j = jac(res.x);
  Vec polished = res.x - j.fullPivLu().solve(r);
  if (polished.allFinite() && residual(polished).cwiseAbs().maxCoeff() <= r.cwiseAbs().maxCoeff())
    res.x = polished;
  return res.x;
}

Vec CompatibleTransformation::apply(const Vec& s1) const {
  return pair_.lift(s1, solve_vbar(s1));
}

Vec CompatibleTransformation::apply_from(const Vec& s1, const Vec& guess) const {
  return pair_.lift(s1, solve_vbar(s1, &guess));
}

Vec CompatibleTransformation::characterization_residual(const Vec& s1) const {
  const Layout l = layout_of(pair_);
  const Vec s2 = apply(s1);
  return gradient(source_.lagrangian, s2).segment(l.s2_vb(), l.kf) - beta_(pair_.p1_point(s1));
}

Mat CompatibleTransformation::selection() const {
  const Layout l = layout_of(pair_);
  Mat s = Mat::Zero(l.s2_dim(), l.s1_dim());
  for (int i = 0; i < l.n; ++i) {
    s(i, i) = 1.0;
    s(l.s2_v() + i, l.s1_v() + i) = 1.0;
  }
  for (int a = 0; a < l.kf; ++a) s(l.s2_qb() + a, l.s1_qb() + a) = 1.0;
  for (int b = 0; b < l.m; ++b) s(l.s2_pb() + b, l.s1_pb() + b) = 1.0;
  return s;
}

Mat CompatibleTransformation::vbar_derivative(const Vec& s1, const LagrangianJet& jet2) const {
  const Layout l = layout_of(pair_);
  const Mat s = selection();
  const Mat e = vbar_embedding(l);
  const Mat bs = jacobian(beta_.beta, pair_.p1_point(s1)) * p1_selection(l);
  const Mat huu = e.transpose() * jet2.hessian * e;
  const Mat rus = e.transpose() * jet2.hessian * s - bs;
  Eigen::FullPivLU<Mat> lu(huu);
  if (!lu.isInvertible()) throw Error(ErrorKind::SingularJacobian, "d2L2/dvbar2 is singular");
  return -lu.solve(rus);
}

Mat CompatibleTransformation::tangent_map(const Vec& s1) const {
  const Vec s2 = apply(s1);
  const LagrangianJet jet2 = lagrangian_jet(source_, s2);
  return selection() + vbar_embedding(layout_of(pair_)) * vbar_derivative(s1, jet2);
}

Mat CompatibleTransformation::tangent_map_fd(const Vec& s1, double h) const {
  const Vec u0 = solve_vbar(s1);
  return central_difference_jacobian([&](const Vec& x) { return apply_from(x, u0); }, s1, h);
}

Vec apply_psi(const CompatibleTransformation& ct, const Vec& s1) { return ct.apply(s1); }

// ---------------------------------------------------------------------------

namespace {

// Jet of L1 at s1, assembled from the jet of L2 at psi(s1).
struct InducedJet {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

// K(s1) = -beta(y) . Gamma(q2) v and its derivatives.
struct GaugeTerm {
  const CompatibleTransformation& ct;
  Layout l;

  double value(const Vec& s1) const {
    const TransformationPair& pr = ct.pair();
    return -ct.beta()(pr.p1_point(s1)).dot(ct.connection()(pr.q2_point(s1)) * s1.segment(l.n, l.n));
  }

  // Gradient with respect to y at fixed v.
  Vec y_gradient(const Vec& y, const Vec& v) const {
    const Vec q2 = y.head(l.q2_dim());
    const Vec beta = ct.beta()(y);
    const Mat jb = jacobian(ct.beta().beta, y);
    const Mat gamma = ct.connection()(q2);
    const std::vector<Mat> dg = ct.connection().derivatives(q2);
    Vec g = -jb.transpose() * (gamma * v);
    for (int j = 0; j < l.q2_dim(); ++j) g[j] -= beta.dot(dg[j] * v);
    return g;
  }

  bool exact_derivatives() const {
    return ct.beta().beta.has_exact_jacobian() && static_cast<bool>(ct.connection().derivative);
  }

  void add_to(const Vec& s1, Vec& grad, Mat* hess) const {
    const Vec y = ct.pair().p1_point(s1);
    const Vec v = s1.segment(l.n, l.n);
    const Vec q2 = y.head(l.q2_dim());
    const Vec beta = ct.beta()(y);
    const Mat jb = jacobian(ct.beta().beta, y);
    const Mat gamma = ct.connection()(q2);
    const std::vector<Mat> dg = ct.connection().derivatives(q2);
    const Mat p = p1_selection(l);

    grad.segment(l.n, l.n) -= gamma.transpose() * beta;
    grad += p.transpose() * y_gradient(y, v);
    if (!hess) return;

    // Mixed (v, y) block: d/dy_j of -Gamma^T beta.
    Mat mixed = -gamma.transpose() * jb;  // n x y_dim
    for (int j = 0; j < l.q2_dim(); ++j) mixed.col(j) -= dg[j].transpose() * beta;
    const Mat mixed_s = mixed * p;  // n x s1_dim
    hess->middleRows(l.n, l.n) += mixed_s;
    hess->middleCols(l.n, l.n) += mixed_s.transpose();

    // (y, y) block.
    Mat hyy;
    if (exact_derivatives()) {
      hyy = central_difference_jacobian([&](const Vec& yy) { return y_gradient(yy, v); }, y,
                                        ct.beta().beta.fd_step);
      hyy = 0.5 * (hyy + hyy.transpose());
    } else {
      hyy = second_difference_hessian(
          [&](const Vec& yy) {
            return -ct.beta()(yy).dot(ct.connection()(yy.head(l.q2_dim())) * v);
          },
          y, 1e-4);
    }
    *hess += p.transpose() * hyy * p;
  }
};

InducedJet induced_jet(const CompatibleTransformation& ct, const Vec& s1, bool want_hessian) {
  const TransformationPair& pr = ct.pair();
  const Layout l = layout_of(pr);
  const Vec u = ct.solve_vbar(s1);
  const Vec s2 = pr.lift(s1, u);
  const Vec y = pr.p1_point(s1);
  const LagrangianJet jet2 = lagrangian_jet(ct.source(), s2);
  const Vec beta = ct.beta()(y);
  const Mat jb = jacobian(ct.beta().beta, y);
  const Mat p = p1_selection(l);
  const Mat s = ct.selection();
  const GaugeTerm k{ct, l};

  InducedJet out;
  out.value = jet2.value - beta.dot(u) + k.value(s1);
  // Envelope identity: dR/du vanishes at the solution.
  out.gradient = s.transpose() * jet2.gradient - p.transpose() * (jb.transpose() * u);
  out.hessian = Mat::Zero(l.s1_dim(), l.s1_dim());
  if (want_hessian) {
    const Mat e = vbar_embedding(l);
    Mat hbeta;  // Hessian in y of u . beta(y)
    if (ct.beta().beta.has_exact_jacobian()) {
      hbeta = central_difference_jacobian(
          [&](const Vec& yy) { return Vec(ct.beta().beta.jacobian(yy).transpose() * u); }, y,
          ct.beta().beta.fd_step);
      hbeta = 0.5 * (hbeta + hbeta.transpose());
    } else if (l.kf > 0) {
      hbeta = second_difference_hessian([&](const Vec& yy) { return u.dot(ct.beta()(yy)); }, y, 1e-4);
    } else {
      hbeta = Mat::Zero(l.y_dim(), l.y_dim());
    }
    const Mat rss = s.transpose() * jet2.hessian * s - p.transpose() * hbeta * p;
    if (l.kf > 0) {
      const Mat rus = e.transpose() * jet2.hessian * s - jb * p;
      const Mat ruu = e.transpose() * jet2.hessian * e;
      Eigen::FullPivLU<Mat> lu(ruu);
      if (!lu.isInvertible()) throw Error(ErrorKind::SingularJacobian, "d2L2/dvbar2 is singular");
      out.hessian = rss - rus.transpose() * lu.solve(rus);
    } else {
      out.hessian = rss;
    }
  }
  k.add_to(s1, out.gradient, want_hessian ? &out.hessian : nullptr);
  if (want_hessian) out.hessian = 0.5 * (out.hessian + out.hessian.transpose());
  return out;
}

}  // namespace

TwoFormField induced_magnetic_form(const CompatibleTransformation& ct) {
  return induced_magnetic_form(ct.pair(), ct.beta(), ct.connection(), ct.source().magnetic);
}

TwoFormField induced_magnetic_form(const TransformationPair& pr, const BetaMap& beta,
                                   const FiberConnection& conn, const TwoFormField& b2) {
  const Layout l = layout_of(pr);
  if (b2.dim != pr.p2_dim()) throw Error(ErrorKind::InvalidArgument, "B2 does not live on P2");
  return TwoFormField::from(l.y_dim(), [=](const Vec& y) {
    const Vec q2 = y.head(l.q2_dim());
    const Vec bv = beta(y);
    const Mat jb = jacobian(beta.beta, y);
    const Mat gamma = conn(q2);
    const std::vector<Mat> dg = conn.derivatives(q2);
    // theta = beta_a (dqbar^a + Gamma^a_i dq^i); jt(r, j) = d_j theta_r.
    Mat jt = Mat::Zero(l.y_dim(), l.y_dim());
    jt.topRows(l.n) = gamma.transpose() * jb;
    for (int j = 0; j < l.q2_dim(); ++j) jt.col(j).head(l.n) += dg[j].transpose() * bv;
    jt.middleRows(l.n, l.kf) = jb;
    Mat out = jt.transpose() - jt;
    if (!b2.is_identically_zero()) out.topLeftCorner(pr.p2_dim(), pr.p2_dim()) += b2(y.head(pr.p2_dim())).matrix();
    return AntisymMatrix(out);
  });
}

MagneticLagrangianSystem induced_system(std::shared_ptr<const CompatibleTransformation> ct) {
  if (!ct) throw Error(ErrorKind::InvalidArgument, "null transformation");
  const TransformationPair pr = ct->pair();
  ScalarField l1;
  l1.value = [ct](const Vec& s1) { return induced_jet(*ct, s1, false).value; };
  l1.gradient = [ct](const Vec& s1) { return induced_jet(*ct, s1, false).gradient; };
  l1.hessian = [ct](const Vec& s1) { return induced_jet(*ct, s1, true).hessian; };
  std::vector<int> periodic;
  for (int c : ct->source().periodic_coords)
    if (c < pr.n) periodic.push_back(c);
  return MagneticLagrangianSystem(pr.dims1(), std::move(l1), induced_magnetic_form(*ct), std::move(periodic),
                                  ct->source().id + ":induced");
}

// ---------------------------------------------------------------------------

PullbackReport verify_pullback_identities(const CompatibleTransformation& ct,
                                          const MagneticLagrangianSystem& induced,
                                          std::span<const Vec> probes, JacobianMode mode) {
  if (induced.dims != ct.pair().dims1())
    throw Error(ErrorKind::InvalidArgument, "induced system does not live on T_{P1} Q1");
  const Layout l = layout_of(ct.pair());
  PullbackReport report;
  for (const Vec& s1 : probes) {
    const Vec s2 = ct.apply(s1);
    // FD step 1e-4: the Newton solve under an FD source has a noise floor
    // near 1e-10 that a 1e-6 step would amplify past the FD tolerance.
    const Mat jpsi = mode == JacobianMode::ChainRule ? ct.tangent_map(s1) : ct.tangent_map_fd(s1, 1e-4);
    const Mat omega2 = presymplectic_matrix(ct.source(), s2).matrix();
    const Mat omega1 = presymplectic_matrix(induced, s1).matrix();
    const Mat gap = jpsi.transpose() * omega2 * jpsi - omega1;
    report.omega_violation = std::max(report.omega_violation, gap.cwiseAbs().maxCoeff());
    report.energy_violation =
        std::max(report.energy_violation, std::abs(energy(ct.source(), s2) - energy(induced, s1)));
    if (l.kf > 0) {
      const Vec r = gradient(ct.source().lagrangian, s2).segment(l.s2_vb(), l.kf) - ct.beta()(ct.pair().p1_point(s1));
      report.characterization = std::max(report.characterization, r.cwiseAbs().maxCoeff());
    }
    ++report.probes;
  }
  return report;
}

namespace {

double tangency_defect_at(const CompatibleTransformation& ct, const Vec& s1, const Vec& s2, const Vec& x) {
  const Layout l = layout_of(ct.pair());
  if (l.kf == 0) return 0.0;
  if (x.size() != l.s2_dim()) throw Error(ErrorKind::InvalidArgument, "vector field has the wrong length");
  const Mat h2 = hessian(ct.source().lagrangian, s2);
  const Vec lhs = h2.middleRows(l.s2_vb(), l.kf) * x;  // X(dL2/dvbar^a)

  // Y on the y coordinates: shared components copied from X, p free.
  Vec yshared = Vec::Zero(l.y_dim());
  yshared.head(l.n) = x.head(l.n);
  yshared.segment(l.n, l.kf) = x.segment(l.s2_qb(), l.kf);
  yshared.segment(l.n + l.kf, l.m) = x.segment(l.s2_pb(), l.m);
  const Mat jb = jacobian(ct.beta().beta, ct.pair().p1_point(s1));
  Vec defect = lhs - jb * yshared;
  if (l.kF > 0) {
    const Mat jp = jb.rightCols(l.kF);
    const Vec yp = jp.completeOrthogonalDecomposition().solve(defect);
    defect -= jp * yp;
  }
  return defect.cwiseAbs().maxCoeff();
}

}  // namespace

TangencyReport verify_tangency(const CompatibleTransformation& ct, const StateVectorField& field,
                               std::span<const Vec> probes) {
  TangencyReport report;
  for (const Vec& s1 : probes) {
    const Vec s2 = ct.apply(s1);
    const double d = tangency_defect_at(ct, s1, s2, field(s2));
    report.defect.push_back(d);
    report.max_defect = std::max(report.max_defect, d);
  }
  return report;
}

Vec preimage(const CompatibleTransformation& ct, const Vec& s2, double tol) {
  const TransformationPair& pr = ct.pair();
  if (pr.k_F != 0) throw Error(ErrorKind::InvalidArgument, "preimage needs k_F == 0");
  validate_state(pr.dims2(), s2);
  const Vec s1 = pr.project(s2, Vec(0));
  const Layout l = layout_of(pr);
  const Vec image = ct.apply_from(s1, s2.segment(l.s2_vb(), l.kf));
  if ((image - s2).cwiseAbs().maxCoeff() > tol * (1 + s2.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::NotInImage, "state is not in the image of psi");
  return s1;
}

TangencyReport verify_tangency_at_image(const CompatibleTransformation& ct, const StateVectorField& field,
                                        std::span<const Vec> upstairs_probes) {
  if (ct.pair().k_F != 0) throw Error(ErrorKind::InvalidArgument, "upstairs probes need k_F == 0");
  TangencyReport report;
  for (const Vec& s2 : upstairs_probes) {
    const Vec s1 = preimage(ct, s2);
    const double d = tangency_defect_at(ct, s1, s2, field(s2));
    report.defect.push_back(d);
    report.max_defect = std::max(report.max_defect, d);
  }
  return report;
}

const char* to_string(DiffeoStatus status) {
  switch (status) {
    case DiffeoStatus::NotApplicable: return "NOT_APPLICABLE";
    case DiffeoStatus::Diffeomorphic: return "DIFFEOMORPHIC";
    case DiffeoStatus::NotDiffeomorphic: return "NOT_DIFFEOMORPHIC";
  }
  return "?";
}

DiffeoReport check_diffeomorphic(std::shared_ptr<const CompatibleTransformation> ct,
                                 std::span<const Vec> probes) {
  if (!ct) throw Error(ErrorKind::InvalidArgument, "null transformation");
  DiffeoReport report;
  const TransformationPair& pr = ct->pair();
  if (pr.k_F != pr.k_f) return report;
  if (probes.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one probe");
  bool full = true;
  for (const Vec& s1 : probes) {
    validate_state(pr.dims1(), s1);
    const Mat jb = jacobian(ct->beta().beta, pr.p1_point(s1));
    const int rank = pr.k_f == 0 ? 0 : numerical_rank(jb.rightCols(pr.k_F));
    report.beta_fiber_rank.push_back(rank);
    if (rank < pr.k_f) full = false;
  }
  report.status = full ? DiffeoStatus::Diffeomorphic : DiffeoStatus::NotDiffeomorphic;
  report.induced_hyperregular = check_hyperregular(induced_system(ct), probes).hyperregular();
  return report;
}

CompatibilityCheck check_compatible_vectors(const TransformationPair& pair, const Vec& s1, const Vec& y,
                                            const Vec& s2, const Vec& x, double tol) {
  validate_state(pair.dims1(), s1);
  validate_state(pair.dims2(), s2);
  const double point_gap = (pair.shared_of_s1(s1) - pair.shared_of_s2(s2)).cwiseAbs().maxCoeff();
  if (point_gap > tol) throw Error(ErrorKind::NotCompatiblePoints, "s1 and s2 are not compatible");
  if (y.size() != s1.size() || x.size() != s2.size())
    throw Error(ErrorKind::InvalidArgument, "tangent vectors have the wrong length");
  CompatibilityCheck out;
  out.defect = (pair.shared_of_s1(y) - pair.shared_of_s2(x)).cwiseAbs().maxCoeff();
  out.holds = out.defect <= tol;
  return out;
}

}  // namespace routh
