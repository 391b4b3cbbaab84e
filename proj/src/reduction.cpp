#include "routh/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace routh {

GroupAction FiberwiseAction::action() const { return GroupAction::translations(dims.point_dim(), dropped); }

std::vector<int> FiberwiseAction::kept() const {
  std::vector<int> out;
  for (int c = 0; c < dims.point_dim(); ++c)
    if (std::find(dropped.begin(), dropped.end(), c) == dropped.end()) out.push_back(c);
  return out;
}

Mat FiberwiseAction::projection_matrix() const {
  const BundleDims rd = reduced_dims();
  const int n = dims.n;
  Mat p = Mat::Zero(rd.state_dim(), dims.state_dim());
  for (int i = 0; i < 2 * n; ++i) p(i, i) = 1.0;
  int row = 2 * n;
  for (int c : kept())
    if (c >= n) p(row++, n + c) = 1.0;
  return p;
}

Vec FiberwiseAction::project(const Vec& s) const {
  validate_state(dims, s);
  return projection_matrix() * s;
}

Vec FiberwiseAction::embed(const Vec& reduced, const Vec& values) const {
  const BundleDims rd = reduced_dims();
  if (reduced.size() != rd.state_dim()) throw Error(ErrorKind::InvalidArgument, "reduced state has the wrong length");
  if (values.size() != static_cast<Eigen::Index>(dropped.size()))
    throw Error(ErrorKind::InvalidArgument, "one value per dropped coordinate is required");
  Vec s = projection_matrix().transpose() * reduced;
  for (std::size_t j = 0; j < dropped.size(); ++j) s[dims.n + dropped[j]] = values[j];
  return s;
}

namespace {

void validate_fiberwise(const MagneticLagrangianSystem& sys, const FiberwiseAction& fa) {
  if (sys.dims != fa.dims) throw Error(ErrorKind::InvalidArgument, "action and system live on different bundles");
  for (int c : fa.dropped)
    if (c < fa.dims.n || c >= fa.dims.point_dim())
      throw Error(ErrorKind::InvalidArgument, "only fiber coordinates can be dropped");
}

double form_drift(const TwoFormField& b, const Vec& x, int c) {
  if (b.is_identically_zero()) return 0.0;
  Vec y = x;
  y[c] = x[c] + b.fd_step;
  const Mat bp = b(y).matrix();
  y[c] = x[c] - b.fd_step;
  const Mat bm = b(y).matrix();
  return ((bp - bm) / (2 * b.fd_step)).cwiseAbs().maxCoeff();
}

}  // namespace

ReducibilityReport check_fiberwise_reducible(const MagneticLagrangianSystem& sys, const FiberwiseAction& fa,
                                             std::span<const Vec> probes, const ReducibilityTolerances& tol) {
  validate_fiberwise(sys, fa);
  ReducibilityReport report;
  const int n = sys.dims.n;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Vec& s = probes[i];
    validate_state(sys.dims, s);
    const Vec g = gradient(sys.lagrangian, s);
    const Vec x = point_of(sys.dims, s);
    const Mat b = sys.magnetic(x).matrix();
    double dl = 0.0, ib = 0.0, inv = 0.0;
    for (int c : fa.dropped) {
      dl = std::max(dl, std::abs(g[n + c]));
      ib = std::max(ib, b.row(c).cwiseAbs().maxCoeff());
      inv = std::max(inv, form_drift(sys.magnetic, x, c));
    }
    report.lagrangian = std::max(report.lagrangian, dl);
    report.contraction = std::max(report.contraction, ib);
    report.invariance = std::max(report.invariance, inv);
    if ((dl > tol.lagrangian || ib > tol.contraction || inv > tol.invariance) && report.reducible) {
      report.reducible = false;
      report.worst_probe = static_cast<int>(i);
    }
  }
  return report;
}

MagneticLagrangianSystem fiberwise_reduce(const MagneticLagrangianSystem& sys, const FiberwiseAction& fa,
                                          std::span<const Vec> probes, const ReducibilityTolerances& tol) {
  const ReducibilityReport rep = check_fiberwise_reducible(sys, fa, probes, tol);
  if (!rep.reducible)
    throw NotReducibleError("reducibility conditions fail at a probe", rep.worst_probe);

  const Mat proj = fa.projection_matrix();
  const Mat emb = proj.transpose();
  const ScalarField l = sys.lagrangian;
  ScalarField lr;
  lr.fd_step = l.fd_step;
  lr.fd_hessian_step = l.fd_hessian_step;
  lr.value = [l, emb](const Vec& s) { return l.value(emb * s); };
  if (l.has_exact_gradient())
    lr.gradient = [l, emb](const Vec& s) { return Vec(emb.transpose() * l.gradient(emb * s)); };
  if (l.has_exact_hessian())
    lr.hessian = [l, emb](const Vec& s) { return Mat(emb.transpose() * l.hessian(emb * s) * emb); };

  const BundleDims rd = fa.reduced_dims();
  TwoFormField br;
  if (sys.magnetic.is_identically_zero()) {
    br = TwoFormField::zero(rd.point_dim());
  } else {
    const TwoFormField b = sys.magnetic;
    const std::vector<int> kept = fa.kept();
    const int full_dim = fa.dims.point_dim();
    br = TwoFormField::from(rd.point_dim(), [b, kept, full_dim](const Vec& x) {
      Vec full = Vec::Zero(full_dim);
      for (std::size_t i = 0; i < kept.size(); ++i) full[kept[i]] = x[i];
      const Mat m = b(full).matrix();
      Mat out(kept.size(), kept.size());
      for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = 0; j < kept.size(); ++j) out(i, j) = m(kept[i], kept[j]);
      return AntisymMatrix(out);
    });
  }
  return MagneticLagrangianSystem(rd, std::move(lr), std::move(br), sys.periodic_coords, sys.id + ":reduced");
}

ProjectionReport verify_projection_identities(const MagneticLagrangianSystem& sys,
                                              const MagneticLagrangianSystem& reduced,
                                              const FiberwiseAction& fa, std::span<const Vec> probes) {
  const Mat proj = fa.projection_matrix();
  ProjectionReport report;
  for (const Vec& s : probes) {
    const Vec sr = fa.project(s);
    const Mat pulled = proj.transpose() * presymplectic_matrix(reduced, sr).matrix() * proj;
    report.omega = std::max(report.omega, (pulled - presymplectic_matrix(sys, s).matrix()).cwiseAbs().maxCoeff());
    report.energy = std::max(report.energy, std::abs(energy(reduced, sr) - energy(sys, s)));
    report.fiber_derivative = std::max(
        report.fiber_derivative, (fiber_derivative(reduced, sr) - fiber_derivative(sys, s)).cwiseAbs().maxCoeff());
  }
  return report;
}

BetaMap build_beta_from_mu(const GroupAction& action, const Vec& mu, const BgPotential* delta,
                           const std::vector<int>& fiber_coords) {
  const int g = action.g_dim;
  if (mu.size() != g) throw Error(ErrorKind::InvalidArgument, "mu has the wrong length");
  if (static_cast<int>(fiber_coords.size()) != g)
    throw Error(ErrorKind::InvalidArgument, "one fiber coordinate per generator is required");
  require_finite(mu, "mu");
  const GroupAction act = action;
  auto sigma_fib = [act, fiber_coords, g](const Vec& y) {
    const Mat s = act.generators(y);
    Mat f(g, g);
    for (int a = 0; a < g; ++a) f.row(a) = s.row(fiber_coords[a]);
    Eigen::FullPivLU<Mat> lu(f);
    if (!lu.isInvertible()) throw Error(ErrorKind::NotFreeAction, "fiber generators are singular");
    return f;
  };
  std::optional<BgPotential> dcopy;
  if (delta) dcopy = *delta;
  auto value = [sigma_fib, mu, dcopy](const Vec& y) {
    Vec rhs = mu;
    if (dcopy) rhs += dcopy->delta.value(y);
    return Vec(sigma_fib(y).transpose().fullPivLu().solve(rhs));
  };
  if (!delta && !action.translation_coords.empty()) {
    // Translation generators are constant, so beta is constant.
    return BetaMap{VectorField::constant(value(Vec::Zero(action.space_dim)))};
  }
  VectorField f;
  f.value = value;
  return BetaMap{f};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Vec> default_probes(int n, std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    Vec s(2 * n);
    for (int j = 0; j < 2 * n; ++j) s[j] = u(rng);
    out.push_back(s);
  }
  return out;
}

// Adapted-order state (q_base, qbar, v_base, vbar) -> intermediate state
// (q_base, v_base, qbar).
Vec intermediate_state(const Vec& adapted, int nb, int g) {
  Vec s1(2 * nb + g);
  s1 << adapted.head(nb), adapted.segment(nb + g, nb), adapted.segment(nb, g);
  return s1;
}

}  // namespace

AdaptedScheme make_adapted_scheme(const GroupAction& action, const Vec& mu, const Connection& conn,
                                  const BgPotential* delta) {
  validate_action(action);
  const int n = action.space_dim;
  const int g = action.g_dim;
  if (action.translation_coords.empty())
    throw Error(ErrorKind::InvalidArgument, "adapted coordinates need translation coordinates");
  if (g >= n) throw Error(ErrorKind::InvalidArgument, "the group must be smaller than Q");
  if (conn.n != n || conn.g_dim != g) throw Error(ErrorKind::InvalidArgument, "connection dimensions do not match");

  AdaptedScheme scheme;
  const std::vector<int>& group = action.translation_coords;
  for (int c = 0; c < n; ++c)
    if (std::find(group.begin(), group.end(), c) == group.end()) scheme.order.push_back(c);
  const int nb = static_cast<int>(scheme.order.size());
  for (int c : group) scheme.order.push_back(c);
  const std::vector<int> order = scheme.order;
  scheme.pair = TransformationPair(nb, g, 0, 0);

  auto to_original = [order, n](const Vec& y) {
    Vec q(n);
    for (int j = 0; j < n; ++j) q[order[j]] = y[j];
    return q;
  };
  GroupAction adapted = action;
  adapted.sigma = [action, order, to_original, n](const Vec& y) {
    const Mat s = action.generators(to_original(y));
    Mat out(n, s.cols());
    for (int j = 0; j < n; ++j) out.row(j) = s.row(order[j]);
    return out;
  };
  adapted.translation_coords.clear();
  for (int a = 0; a < g; ++a) adapted.translation_coords.push_back(nb + a);
  scheme.beta = build_beta_from_mu(adapted, mu, delta, adapted.translation_coords);

  // Gamma = sigma_fib A_base; translation generators are constant.
  Mat sig_fib(g, g);
  {
    const Mat s = adapted.generators(Vec::Zero(n));
    for (int a = 0; a < g; ++a) sig_fib.row(a) = s.row(nb + a);
  }
  FiberConnection& fc = scheme.connection;
  fc.n = nb;
  fc.k_f = g;
  fc.fd_step = conn.fd_step;
  fc.gamma = [conn, order, to_original, sig_fib, nb](const Vec& y) {
    const Mat a = conn(to_original(y));
    Mat base(a.rows(), nb);
    for (int j = 0; j < nb; ++j) base.col(j) = a.col(order[j]);
    return Mat(sig_fib * base);
  };
  if (conn.derivative) {
    fc.derivative = [conn, order, to_original, sig_fib, nb, n](const Vec& y) {
      const std::vector<Mat> d = conn.derivatives(to_original(y));
      std::vector<Mat> out(n);
      for (int c = 0; c < n; ++c) {
        Mat base(d[order[c]].rows(), nb);
        for (int j = 0; j < nb; ++j) base.col(j) = d[order[c]].col(order[j]);
        out[c] = sig_fib * base;
      }
      return out;
    };
  }
  return scheme;
}

RouthResult routh_reduce(const MagneticLagrangianSystem& full, const GroupAction& action, const Vec& mu,
                         const Connection& conn, const RouthOptions& options) {
  if (full.dims.k != 0) throw Error(ErrorKind::InvalidArgument, "routh_reduce needs a system on TQ");
  validate_action(action);
  const int n = full.dims.n;
  const int g = action.g_dim;
  if (action.space_dim != n) throw Error(ErrorKind::InvalidArgument, "action must act on Q");
  if (action.translation_coords.empty())
    throw Error(ErrorKind::InvalidArgument, "reduction is implemented for translation actions only");
  if (g >= n) throw Error(ErrorKind::InvalidArgument, "the group must be smaller than Q");
  if (conn.n != n || conn.g_dim != g) throw Error(ErrorKind::InvalidArgument, "connection dimensions do not match");
  if (mu.size() != g) throw Error(ErrorKind::InvalidArgument, "mu has the wrong length");

  std::vector<Vec> generated;
  std::span<const Vec> probes = options.probes;
  if (probes.empty()) {
    generated = default_probes(n, 0x5eed, 8);
    probes = generated;
  }

  // Preconditions on the full system.
  std::vector<Vec> qprobes;
  for (const Vec& s : probes) qprobes.push_back(s.head(n));
  check_free(action, qprobes);
  if (invariance_defect(full, action, probes) > options.invariance_tol)
    throw Error(ErrorKind::NotInvariant, "the Lagrangian depends on a group coordinate");
  if (!check_G_regular(full, action, probes).regular)
    throw Error(ErrorKind::SingularJacobian, "system is not G-regular at a probe");
  if (connection_defect(conn, action, qprobes) > 1e-10)
    throw Error(ErrorKind::InvalidArgument, "connection does not reproduce the generators");

  RouthResult rr;
  rr.mu = mu;
  rr.connection = conn;
  rr.group_coords = action.translation_coords;
  AdaptedScheme scheme = make_adapted_scheme(action, mu, conn, options.delta);
  rr.order = scheme.order;
  const std::vector<int>& order = rr.order;
  const int nb = n - g;
  const TransformationPair pair = scheme.pair;
  MagneticLagrangianSystem l2 = permute_coordinates(full, order);
  BetaMap beta = std::move(scheme.beta);
  FiberConnection fc = std::move(scheme.connection);

  auto ct = std::make_shared<const CompatibleTransformation>(pair, std::move(l2), std::move(beta), std::move(fc));
  rr.transformation = ct;
  rr.intermediate = induced_system(ct);

  std::vector<int> isotropy = options.isotropy;
  if (isotropy.empty())
    for (int a = 0; a < g; ++a) isotropy.push_back(a);
  rr.quotient.dims = pair.dims1();
  for (int a : isotropy) {
    if (a < 0 || a >= g) throw Error(ErrorKind::InvalidArgument, "isotropy index out of range");
    rr.quotient.dropped.push_back(nb + a);
  }

  std::vector<Vec> inter_probes;
  for (const Vec& s : probes) inter_probes.push_back(intermediate_state(permute_state(s, order), nb, g));
  rr.reduced = fiberwise_reduce(rr.intermediate, rr.quotient, inter_probes);
  return rr;
}

Vec reduce_state(const RouthResult& rr, const Vec& full_state) {
  const int n = static_cast<int>(rr.order.size());
  const int g = static_cast<int>(rr.group_coords.size());
  if (full_state.size() != 2 * n) throw Error(ErrorKind::InvalidArgument, "full state has the wrong length");
  return rr.quotient.project(intermediate_state(permute_state(full_state, rr.order), n - g, g));
}

namespace {

// Intermediate state from a reduced state and values of the dropped
// coordinates.
Vec intermediate_from_reduced(const RouthResult& rr, const Vec& reduced, const Vec& group) {
  return rr.quotient.embed(reduced, group);
}

}  // namespace

Vec lift_reduced_state(const RouthResult& rr, const Vec& reduced_state, const Vec& group0) {
  const Vec s1 = intermediate_from_reduced(rr, reduced_state, group0);
  return unpermute_state(rr.transformation->apply(s1), rr.order);
}

std::vector<double> cumulative_quadrature(const std::vector<double>& f, double h) {
  const std::size_t m = f.size();
  std::vector<double> out(m, 0.0);
  if (m < 2) return out;
  if (m < 4) {
    // Too few samples for a fourth-order rule.
    for (std::size_t k = 1; k < m; ++k) out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
    return out;
  }
  // Even k: composite Simpson. Odd k: Simpson up to k-3 plus the 3/8 rule;
  // k = 1 uses the cubic through the first four samples.
  out[1] = h * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]) / 24;
  std::vector<double> simpson(m, 0.0);
  for (std::size_t k = 2; k < m; k += 2) simpson[k] = simpson[k - 2] + h / 3 * (f[k - 2] + 4 * f[k - 1] + f[k]);
  for (std::size_t k = 2; k < m; ++k) {
    if (k % 2 == 0) {
      out[k] = simpson[k];
    } else {
      out[k] = simpson[k - 3] + 3 * h / 8 * (f[k - 3] + 3 * f[k - 2] + 3 * f[k - 1] + f[k]);
    }
  }
  return out;
}

Trajectory reconstruct(const RouthResult& rr, const Trajectory& reduced, const Vec& group0) {
  reduced.validate();
  const int n = static_cast<int>(rr.order.size());
  const int g = static_cast<int>(rr.group_coords.size());
  const int nb = n - g;
  const std::size_t count = reduced.size();
  const std::size_t dropped = rr.quotient.dropped.size();
  if (group0.size() != static_cast<Eigen::Index>(dropped))
    throw Error(ErrorKind::InvalidArgument, "one initial value per dropped coordinate is required");

  // Velocities of the dropped coordinates; by invariance they do not depend
  // on the group coordinates themselves.
  std::vector<Vec> lifted(count);
  std::vector<std::vector<double>> rates(dropped, std::vector<double>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const Vec s1 = intermediate_from_reduced(rr, reduced.states[i], group0);
    lifted[i] = rr.transformation->apply(s1);  // (q_base, qbar, v_base, vbar)
    for (std::size_t j = 0; j < dropped; ++j) {
      const int a = rr.quotient.dropped[j] - nb;
      rates[j][i] = lifted[i][2 * nb + g + a];
    }
  }
  const double h = count > 1 ? reduced.step() : 0.0;
  for (std::size_t j = 0; j < dropped; ++j) {
    const int a = rr.quotient.dropped[j] - nb;
    const std::vector<double> integral = cumulative_quadrature(rates[j], h);
    for (std::size_t i = 0; i < count; ++i) lifted[i][nb + a] = group0[j] + integral[i];
  }

  Trajectory out;
  out.times = reduced.times;
  out.system_id = rr.transformation->source().id;
  out.momentum_tag = rr.mu;
  out.states.reserve(count);
  for (const Vec& s : lifted) out.states.push_back(unpermute_state(s, rr.order));
  return out;
}

BmuReport verify_bmu_reducible(const TwoFormField& b, const FiberwiseAction& fa, std::span<const Vec> points) {
  BmuReport report;
  for (const Vec& x : points) {
    const Mat m = b(x).matrix();
    for (int c : fa.dropped) {
      report.contraction = std::max(report.contraction, m.row(c).cwiseAbs().maxCoeff());
      report.invariance = std::max(report.invariance, form_drift(b, x, c));
    }
  }
  return report;
}

}  // namespace routh
