#include "routh/hamside.hpp"

#include <cmath>

namespace routh {

Vec CovStateTPQ::pack() const {
  Vec s(q.size() + alpha.size() + p.size());
  s << q, alpha, p;
  return s;
}

CovStateTPQ CovStateTPQ::unpack(const BundleDims& dims, const Vec& s) {
  validate_state(dims, s);
  return {s.head(dims.n), s.segment(dims.n, dims.n), s.tail(dims.k)};
}

MagneticHamiltonianSystem::MagneticHamiltonianSystem(BundleDims dims_, ScalarField hamiltonian_,
                                                     TwoFormField magnetic_, std::string id_)
    : dims(dims_), hamiltonian(std::move(hamiltonian_)), magnetic(std::move(magnetic_)), id(std::move(id_)) {
  if (!hamiltonian.value) throw Error(ErrorKind::InvalidArgument, "hamiltonian has no value callback");
  if (!magnetic.value) magnetic = TwoFormField::zero(dims.point_dim());
  if (magnetic.dim != dims.point_dim())
    throw Error(ErrorKind::InvalidArgument, "magnetic form dimension must equal dim P");
}

AntisymMatrix ham_presymplectic_matrix(const BundleDims& dims, const TwoFormField& b, const Vec& s) {
  validate_state(dims, s);
  const int n = dims.n;
  const int k = dims.k;
  Mat omega = Mat::Zero(2 * n + k, 2 * n + k);
  for (int i = 0; i < n; ++i) {
    omega(n + i, i) = 1.0;
    omega(i, n + i) = -1.0;
  }
  if (!b.is_identically_zero()) {
    const Mat bx = b(point_of(dims, s)).matrix();
    omega.block(0, 0, n, n) += bx.block(0, 0, n, n);
    omega.block(0, 2 * n, n, k) += bx.block(0, n, n, k);
    omega.block(2 * n, 0, k, n) += bx.block(n, 0, k, n);
    omega.block(2 * n, 2 * n, k, k) += bx.block(n, n, k, k);
  }
  return AntisymMatrix(omega);
}

AntisymMatrix ham_presymplectic_matrix(const MagneticHamiltonianSystem& sys, const Vec& s) {
  return ham_presymplectic_matrix(sys.dims, sys.magnetic, s);
}

PresymplecticSolution ham_vector_field(const MagneticHamiltonianSystem& sys, const Vec& s) {
  const Vec dh = gradient(sys.hamiltonian, s);
  require_finite(dh, "dH");
  return solve_presymplectic(ham_presymplectic_matrix(sys, s), dh);
}

Vec apply_psi_ham(const TransformationPair& pair, const FiberConnection& conn, const BetaMap& beta,
                  const Vec& s1) {
  validate_state(pair.dims1(), s1);
  const int n = pair.n;
  const Vec y = pair.p1_point(s1);
  const Vec q2 = pair.q2_point(s1);
  const Vec b = beta(y);
  require_finite(b, "beta");
  Vec s2(2 * (n + pair.k_f) + pair.m);
  s2 << s1.head(n), s1.segment(2 * n, pair.k_f), Vec(s1.segment(n, n) + conn(q2).transpose() * b), b,
      s1.segment(2 * n + pair.k_f, pair.m);
  return s2;
}

Mat psi_ham_tangent(const TransformationPair& pair, const FiberConnection& conn, const BetaMap& beta,
                    const Vec& s1) {
  validate_state(pair.dims1(), s1);
  const int n = pair.n, kf = pair.k_f, m = pair.m;
  const int d1 = pair.dims1().state_dim();
  const int d2 = pair.dims2().state_dim();
  const Vec y = pair.p1_point(s1);
  const Vec q2 = pair.q2_point(s1);
  const Vec b = beta(y);
  const Mat jb = jacobian(beta.beta, y);  // kf x y_dim
  const Mat gamma = conn(q2);
  const std::vector<Mat> dg = conn.derivatives(q2);

  // Column of s1 slot for each y index.
  std::vector<int> ycol(y.size());
  for (int i = 0; i < n; ++i) ycol[i] = i;
  for (int i = n; i < y.size(); ++i) ycol[i] = n + i;

  Mat j = Mat::Zero(d2, d1);
  for (int i = 0; i < n; ++i) j(i, i) = 1.0;
  for (int a = 0; a < kf; ++a) j(n + a, 2 * n + a) = 1.0;
  for (int i = 0; i < n; ++i) j(n + kf + i, n + i) = 1.0;
  for (int c = 0; c < y.size(); ++c) {
    Vec col = gamma.transpose() * jb.col(c);
    if (c < n + kf) col += dg[c].transpose() * b;
    j.block(n + kf, ycol[c], n, 1) += col;
    j.block(2 * n + kf, ycol[c], kf, 1) += jb.col(c);
  }
  for (int r = 0; r < m; ++r) j(2 * n + 2 * kf + r, 2 * n + kf + r) = 1.0;
  return j;
}

HamPullbackReport verify_ham_pullback(const TransformationPair& pair, const FiberConnection& conn,
                                      const BetaMap& beta, const TwoFormField& b2, std::span<const Vec> probes) {
  const TwoFormField b1 = induced_magnetic_form(pair, beta, conn, b2);
  HamPullbackReport report;
  for (const Vec& s1 : probes) {
    const Vec s2 = apply_psi_ham(pair, conn, beta, s1);
    const Mat j = psi_ham_tangent(pair, conn, beta, s1);
    const Mat o2 = ham_presymplectic_matrix(pair.dims2(), b2, s2).matrix();
    const Mat o1 = ham_presymplectic_matrix(pair.dims1(), b1, s1).matrix();
    report.max_violation = std::max(report.max_violation, (j.transpose() * o2 * j - o1).cwiseAbs().maxCoeff());
    ++report.probes;
  }
  return report;
}

Vec cotangent_momentum(const GroupAction& action, const Vec& s) {
  const int n = action.space_dim;
  if (s.size() != 2 * n) throw Error(ErrorKind::InvalidArgument, "state must be a T*Q state");
  return action.generators(s.head(n)).transpose() * s.tail(n);
}

Vec momentum_shift(const Connection& conn, const Vec& mu, const Vec& s) {
  const int n = conn.n;
  if (s.size() != 2 * n) throw Error(ErrorKind::InvalidArgument, "state must be a T*Q state");
  Vec out = s;
  out.tail(n) -= conn(s.head(n)).transpose() * mu;
  return out;
}

Vec project_to_momentum_level(const GroupAction& action, const Vec& mu, const Vec& s) {
  const int n = action.space_dim;
  if (action.translation_coords.empty())
    throw Error(ErrorKind::InvalidArgument, "level projection needs translation coordinates");
  const Mat sig = action.generators(s.head(n));
  const int g = action.g_dim;
  Mat fib(g, g);
  for (int a = 0; a < g; ++a) fib.row(a) = sig.row(action.translation_coords[a]);
  // J = sigma^T alpha; solve for the group components with the rest fixed.
  Vec rest = s.tail(n);
  for (int c : action.translation_coords) rest[c] = 0.0;
  const Vec target = mu - sig.transpose() * rest;
  const Vec alpha_g = fib.transpose().fullPivLu().solve(target);
  Vec out = s;
  for (int a = 0; a < g; ++a) out[n + action.translation_coords[a]] = alpha_g[a];
  return out;
}

namespace {

// Adapted T*Q state (q_base, qbar, alpha_base, alpha_fib) -> downstairs
// state (q_base, alpha_base, qbar) of the momentum-shift pair.
Vec downstairs_of(const Vec& adapted, int nb, int g) {
  Vec s1(2 * nb + g);
  s1 << adapted.head(nb), adapted.segment(nb + g, nb), adapted.segment(nb, g);
  return s1;
}

}  // namespace

MomentumShiftReport momentum_shift_check(const GroupAction& action, const Vec& mu, const Connection& conn,
                                         std::span<const Vec> probes) {
  const AdaptedScheme scheme = make_adapted_scheme(action, mu, conn);
  const int g = action.g_dim;
  const int nb = action.space_dim - g;
  MomentumShiftReport report;
  for (const Vec& s : probes) {
    report.level_defect = std::max(report.level_defect, (cotangent_momentum(action, s) - mu).cwiseAbs().maxCoeff());
    const Vec shifted = momentum_shift(conn, mu, s);
    report.shifted_momentum =
        std::max(report.shifted_momentum, cotangent_momentum(action, shifted).cwiseAbs().maxCoeff());
    const Vec s1 = downstairs_of(permute_state(shifted, scheme.order), nb, g);
    const Vec back = unpermute_state(apply_psi_ham(scheme.pair, scheme.connection, scheme.beta, s1), scheme.order);
    report.round_trip = std::max(report.round_trip, (back - s).cwiseAbs().maxCoeff());
    ++report.probes;
  }
  return report;
}

double hamiltonian_relatedness_defect(const MagneticHamiltonianSystem& full, const GroupAction& action,
                                      const Vec& mu, const Connection& conn, std::span<const Vec> probes) {
  if (full.dims.k != 0) throw Error(ErrorKind::InvalidArgument, "full system must live on T*Q");
  const AdaptedScheme scheme = make_adapted_scheme(action, mu, conn);
  const TransformationPair& pair = scheme.pair;
  const int g = action.g_dim;
  const int nb = action.space_dim - g;
  const std::vector<int> order = scheme.order;

  const TwoFormField b1 = induced_magnetic_form(pair, scheme.beta, scheme.connection, TwoFormField::zero(pair.p2_dim()));
  if (!full.magnetic.is_identically_zero())
    throw Error(ErrorKind::InvalidArgument, "relatedness check is implemented for B2 = 0");

  double worst = 0.0;
  for (const Vec& s : probes) {
    const Vec s2 = permute_state(s, order);
    const Vec dh2 = permute_state(gradient(full.hamiltonian, s), order);
    const PresymplecticSolution up =
        solve_presymplectic(ham_presymplectic_matrix(pair.dims2(), TwoFormField::zero(pair.p2_dim()), s2), dh2);

    const Vec s1 = downstairs_of(permute_state(momentum_shift(conn, mu, s), order), nb, g);
    // dH1 = Jpsi^T dH2 at psi(s1).
    const Mat j = psi_ham_tangent(pair, scheme.connection, scheme.beta, s1);
    const Vec image = apply_psi_ham(pair, scheme.connection, scheme.beta, s1);
    const Vec dh1 = j.transpose() * permute_state(gradient(full.hamiltonian, unpermute_state(image, order)), order);
    const PresymplecticSolution down = solve_presymplectic(ham_presymplectic_matrix(pair.dims1(), b1, s1), dh1);

    std::vector<int> slots;
    Vec target(g);
    for (int a = 0; a < g; ++a) {
      slots.push_back(2 * nb + a);
      target[a] = up.solution[nb + a];
    }
    const Vec x1 = gauge_toward(down, slots, target);
    worst = std::max(worst, (j * x1 - up.solution).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace routh
