#include "routh/models.hpp"

#include <cmath>

namespace routh {

void MechanicalSpec::validate() const {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "mechanical system needs n >= 1");
  if (mass.rows() != n || mass.cols() != n) throw Error(ErrorKind::InvalidArgument, "mass matrix must be n x n");
  if (!mass.allFinite() || (mass - mass.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error(ErrorKind::InvalidArgument, "mass matrix must be finite and symmetric");
  Eigen::LLT<Mat> llt(mass);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::NotMechanical, "mass matrix is not positive definite");
  for (const CosineTerm& t : potential)
    if (t.wave.size() != n || !std::isfinite(t.coeff) || !t.wave.allFinite())
      throw Error(ErrorKind::InvalidArgument, "potential term has the wrong shape");
  for (int c : periodic)
    if (c < 0 || c >= n) throw Error(ErrorKind::InvalidArgument, "periodic index out of range");
  for (int c : group)
    if (c < 0 || c >= n) throw Error(ErrorKind::InvalidArgument, "group coordinate out of range");
  for (int c : group)
    for (const CosineTerm& t : potential)
      if (t.wave[c] != 0.0) throw Error(ErrorKind::NotInvariant, "potential depends on a group coordinate");
}

double MechanicalSpec::potential_value(const Vec& q) const {
  double v = 0.0;
  for (const CosineTerm& t : potential) v += t.coeff * std::cos(t.wave.dot(q));
  return v;
}

MagneticLagrangianSystem build_mechanical(const MechanicalSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const Mat m = spec.mass;
  const std::vector<CosineTerm> terms = spec.potential;
  ScalarField l;
  l.value = [spec, m, n](const Vec& s) {
    const Vec v = s.segment(n, n);
    return 0.5 * v.dot(m * v) - spec.potential_value(s.head(n));
  };
  l.gradient = [terms, m, n](const Vec& s) {
    Vec g = Vec::Zero(2 * n);
    const Vec q = s.head(n);
    for (const CosineTerm& t : terms) g.head(n) += t.coeff * std::sin(t.wave.dot(q)) * t.wave;
    g.tail(n) = m * s.segment(n, n);
    return g;
  };
  l.hessian = [terms, m, n](const Vec& s) {
    Mat h = Mat::Zero(2 * n, 2 * n);
    const Vec q = s.head(n);
    for (const CosineTerm& t : terms)
      h.topLeftCorner(n, n) += t.coeff * std::cos(t.wave.dot(q)) * t.wave * t.wave.transpose();
    h.bottomRightCorner(n, n) = m;
    return h;
  };
  return MagneticLagrangianSystem(BundleDims(n, 0), std::move(l), TwoFormField::zero(n), spec.periodic, spec.id);
}

MagneticHamiltonianSystem build_mechanical_hamiltonian(const MechanicalSpec& spec) {
  spec.validate();
  const int n = spec.n;
  const Mat minv = spec.mass.inverse();
  const std::vector<CosineTerm> terms = spec.potential;
  ScalarField h;
  h.value = [spec, minv, n](const Vec& s) {
    const Vec a = s.segment(n, n);
    return 0.5 * a.dot(minv * a) + spec.potential_value(s.head(n));
  };
  h.gradient = [terms, minv, n](const Vec& s) {
    Vec g = Vec::Zero(2 * n);
    const Vec q = s.head(n);
    for (const CosineTerm& t : terms) g.head(n) -= t.coeff * std::sin(t.wave.dot(q)) * t.wave;
    g.tail(n) = minv * s.segment(n, n);
    return g;
  };
  h.hessian = [terms, minv, n](const Vec& s) {
    Mat hh = Mat::Zero(2 * n, 2 * n);
    const Vec q = s.head(n);
    for (const CosineTerm& t : terms)
      hh.topLeftCorner(n, n) -= t.coeff * std::cos(t.wave.dot(q)) * t.wave * t.wave.transpose();
    hh.bottomRightCorner(n, n) = minv;
    return hh;
  };
  return MagneticHamiltonianSystem(BundleDims(n, 0), std::move(h), TwoFormField::zero(n), spec.id + ":hamiltonian");
}

// ---------------------------------------------------------------------------

void ThreeBodyParams::validate() const {
  if (!(I1 > 0 && I2 > 0 && I3 > 0)) throw Error(ErrorKind::InvalidArgument, "moments of inertia must be positive");
  if (!std::isfinite(I1 + I2 + I3 + c1 + c2 + c3))
    throw Error(ErrorKind::InvalidArgument, "three-body parameters must be finite");
}

Mat ThreeBodyParams::mass_matrix() const {
  Mat w(3, 3);
  w << total(), I2 + I3, I3,
       I2 + I3, I2 + I3, I3,
       I3, I3, I3;
  return w;
}

MechanicalSpec ThreeBodyParams::spec() const {
  validate();
  MechanicalSpec s;
  s.n = 3;
  s.mass = mass_matrix();
  auto wave = [](double a, double b, double c) {
    Vec w(3);
    w << a, b, c;
    return w;
  };
  if (c1 != 0.0) s.potential.push_back({c1, wave(0, 1, 0)});
  if (c2 != 0.0) s.potential.push_back({c2, wave(0, 0, 1)});
  if (c3 != 0.0) s.potential.push_back({c3, wave(0, 1, -1)});
  s.periodic = {0, 1, 2};
  s.group = {0};
  s.id = "three_body";
  return s;
}

ThreeBodyModel build_three_body(const ThreeBodyParams& params) {
  params.validate();
  const MechanicalSpec spec = params.spec();
  ThreeBodyModel m{params, build_mechanical(spec), build_mechanical_hamiltonian(spec),
                   GroupAction::translations(3, {0}), {}, {}};
  const double sum = params.total();
  Mat am(1, 3);
  am << 1.0, (params.I2 + params.I3) / sum, params.I3 / sum;
  m.mechanical.n = 3;
  m.mechanical.g_dim = 1;
  m.mechanical.coefficients = [am](const Vec&) { return am; };
  m.mechanical.derivative = [](const Vec&) { return std::vector<Mat>(3, Mat::Zero(1, 3)); };

  m.a0.n = 3;
  m.a0.g_dim = 1;
  m.a0.coefficients = [](const Vec& q) {
    Mat a(1, 3);
    a << 1.0, std::cos(q[2]), 0.0;
    return a;
  };
  m.a0.derivative = [](const Vec& q) {
    std::vector<Mat> d(3, Mat::Zero(1, 3));
    d[2](0, 1) = -std::sin(q[2]);
    return d;
  };
  return m;
}

Vec three_body_state_on_level(const ThreeBodyParams& params, double theta, double phi, double psi,
                              double phidot, double psidot, double mu) {
  params.validate();
  const double thetadot = (mu - (params.I2 + params.I3) * phidot - params.I3 * psidot) / params.total();
  Vec s(6);
  s << theta, phi, psi, thetadot, phidot, psidot;
  return s;
}

}  // namespace routh
