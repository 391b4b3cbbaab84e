#include <cmath>
#include <memory>

#include "routh/integrators.hpp"
#include "routh/transform.hpp"
#include "support.hpp"

namespace routh {
namespace {

using test::max_abs;

// Nonlinear source on P2 = (q0, q1, qbar, pbar) over Q2 = (q0, q1, qbar):
//   L2 = 1/2 (2 + sin q1) v0^2 + 1/2 v1^2 + 1/2 (1 + q0^2) vb^2 + 0.1 vb^4
//        + vb v0 sin q1 + pbar v1 - cos q0 - 1/2 pbar^2 - 0.3 cos qbar
// with state (q0, q1, qbar, v0, v1, vb, pbar) and a closed magnetic term
// B2 = d(sin(q0) pbar dq1).
MagneticLagrangianSystem nonlinear_source() {
  ScalarField l;
  l.value = [](const Vec& s) {
    const double q0 = s[0], q1 = s[1], qb = s[2], v0 = s[3], v1 = s[4], vb = s[5], pb = s[6];
    return 0.5 * (2 + std::sin(q1)) * v0 * v0 + 0.5 * v1 * v1 + 0.5 * (1 + q0 * q0) * vb * vb +
           0.1 * std::pow(vb, 4) + vb * v0 * std::sin(q1) + pb * v1 - std::cos(q0) - 0.5 * pb * pb -
           0.3 * std::cos(qb);
  };
  l.gradient = [](const Vec& s) {
    const double q0 = s[0], q1 = s[1], qb = s[2], v0 = s[3], v1 = s[4], vb = s[5], pb = s[6];
    Vec g(7);
    g << q0 * vb * vb + std::sin(q0), 0.5 * std::cos(q1) * v0 * v0 + vb * v0 * std::cos(q1), 0.3 * std::sin(qb),
        (2 + std::sin(q1)) * v0 + vb * std::sin(q1), v1 + pb, (1 + q0 * q0) * vb + 0.4 * std::pow(vb, 3) + v0 * std::sin(q1),
        v1 - pb;
    return g;
  };
  l.hessian = [](const Vec& s) {
    const double q0 = s[0], q1 = s[1], qb = s[2], v0 = s[3], vb = s[5];
    Mat h = Mat::Zero(7, 7);
    auto sym = [&](int i, int j, double v) { h(i, j) = h(j, i) = v; };
    sym(0, 0, vb * vb + std::cos(q0));
    sym(0, 5, 2 * q0 * vb);
    sym(1, 1, -0.5 * std::sin(q1) * v0 * v0 - vb * v0 * std::sin(q1));
    sym(1, 3, std::cos(q1) * v0 + vb * std::cos(q1));
    sym(1, 5, v0 * std::cos(q1));
    sym(2, 2, 0.3 * std::cos(qb));
    sym(3, 3, 2 + std::sin(q1));
    sym(3, 5, std::sin(q1));
    sym(4, 4, 1.0);
    sym(4, 6, 1.0);
    sym(5, 5, 1 + q0 * q0 + 1.2 * vb * vb);
    sym(6, 6, -1.0);
    return h;
  };
  const TwoFormField b = TwoFormField::from(4, [](const Vec& x) {
    AntisymMatrix m = AntisymMatrix::zero(4);
    m.set(0, 1, std::cos(x[0]) * x[3]);
    m.set(3, 1, std::sin(x[0]));
    return m;
  });
  return MagneticLagrangianSystem(BundleDims(3, 1), l, b, {}, "nonlinear");
}

// beta on P1 = (q0, q1, qbar, pbar, p).
BetaMap nonlinear_beta() {
  VectorField b;
  b.value = [](const Vec& y) { return Vec::Constant(1, 0.3 + 0.5 * y[4] + 0.2 * std::sin(y[2]) + 0.1 * y[0] * y[3]); };
  b.jacobian = [](const Vec& y) {
    Mat j(1, 5);
    j << 0.1 * y[3], 0.0, 0.2 * std::cos(y[2]), 0.1 * y[0], 0.5;
    return j;
  };
  return BetaMap{b};
}

FiberConnection nonlinear_connection() {
  FiberConnection c;
  c.n = 2;
  c.k_f = 1;
  c.gamma = [](const Vec& q2) {
    Mat g(1, 2);
    g << 0.3 * std::cos(q2[1]), 0.2 * q2[2];
    return g;
  };
  c.derivative = [](const Vec& q2) {
    std::vector<Mat> d(3, Mat::Zero(1, 2));
    d[1](0, 0) = -0.3 * std::sin(q2[1]);
    d[2](0, 1) = 0.2;
    return d;
  };
  return c;
}

std::shared_ptr<const CompatibleTransformation> nonlinear_transformation() {
  return std::make_shared<const CompatibleTransformation>(TransformationPair(2, 1, 1, 1), nonlinear_source(),
                                                          nonlinear_beta(), nonlinear_connection());
}

// s1 = (q0, q1, v0, v1, qbar, pbar, p).
std::vector<Vec> nonlinear_probes(int count, std::uint64_t seed) { return test::uniform_probes(7, count, seed); }

TEST(NonlinearFixture, ExactDerivativesAreCorrect) {
  const MagneticLagrangianSystem src = nonlinear_source();
  EXPECT_LT(cross_check_derivatives(src.lagrangian, test::uniform_probes(7, 50, 1)).max(), 1e-6);
  EXPECT_LT(cross_check_jacobian(nonlinear_beta().beta, test::uniform_probes(5, 50, 2)), 1e-8);
  EXPECT_LT(closedness_defect(src.magnetic, test::uniform_probes(4, 20, 3)), 1e-6);
}

TEST(FRegularity, Cases) {
  const ThreeBodyModel tb = test::three_body();
  const RouthResult rr = test::three_body_routh(tb, 0.5, false);
  const std::vector<Vec> s2 = test::three_body_probes(10, 4);
  const FRegularityReport r = check_f_regular(rr.transformation->source(), rr.transformation->pair(), s2);
  EXPECT_TRUE(r.f_regular);
  for (double d : r.determinant) EXPECT_NEAR(d, 6.0, 1e-13);

  // L2 affine in vbar.
  ScalarField l;
  l.value = [](const Vec& s) { return 0.5 * s[2] * s[2] + s[3] * std::sin(s[0]); };
  const MagneticLagrangianSystem affine(BundleDims(2, 0), l, TwoFormField::zero(2));
  const FRegularityReport bad = check_f_regular(affine, TransformationPair(1, 1, 0, 0), test::uniform_probes(4, 5, 5));
  EXPECT_FALSE(bad.f_regular);
  EXPECT_NEAR(bad.determinant[0], 0.0, 1e-8);

  MechanicalSpec spec;
  spec.n = 3;
  const Mat a = Mat::Random(3, 3);
  spec.mass = a * a.transpose() + 0.1 * Mat::Identity(3, 3);
  EXPECT_TRUE(check_f_regular(build_mechanical(spec), TransformationPair(1, 2, 0, 0), test::uniform_probes(6, 10, 6))
                  .f_regular);
}

TEST(ApplyPsi, ThreeBodyThetaVelocity) {
  const ThreeBodyModel tb = test::three_body();
  for (bool a0 : {false, true}) {
    const RouthResult rr = test::three_body_routh(tb, 0.5, a0);
    for (const Vec& s1 : test::intermediate_probes(20, 7)) {
      const Vec s2 = rr.transformation->apply(s1);
      EXPECT_NEAR(s2[5], (0.5 - 5 * s1[2] - 3 * s1[3]) / 6.0, 1e-12);
      // Shared coordinates are copied.
      EXPECT_EQ(s2[0], s1[0]);
      EXPECT_EQ(s2[1], s1[1]);
      EXPECT_EQ(s2[2], s1[4]);
      EXPECT_EQ(s2[3], s1[2]);
      EXPECT_EQ(s2[4], s1[3]);
    }
  }
}

TEST(ApplyPsi, RoundTripThroughTheMomentumValue) {
  const ThreeBodyModel tb = test::three_body();
  for (const Vec& s : test::three_body_probes(10, 8)) {
    const double mu = momentum_map(tb.system, tb.action, s)[0];
    const RouthResult rr = test::three_body_routh(tb, mu, true);
    const Vec adapted = permute_state(s, rr.order);
    Vec s1(5);
    s1 << adapted[0], adapted[1], adapted[3], adapted[4], adapted[2];
    EXPECT_NEAR(rr.transformation->apply(s1)[5], s[3], 1e-12);
  }
}

TEST(ApplyPsi, QuadraticNonMechanicalClosedForm) {
  // L2 = 1/2 v^2 + 1/2 vb^2 + vb sin(q) on s2 = (q, qbar, v, vb).
  ScalarField l;
  l.value = [](const Vec& s) { return 0.5 * s[2] * s[2] + 0.5 * s[3] * s[3] + s[3] * std::sin(s[0]); };
  l.gradient = [](const Vec& s) {
    Vec g(4);
    g << s[3] * std::cos(s[0]), 0.0, s[2], s[3] + std::sin(s[0]);
    return g;
  };
  l.hessian = [](const Vec& s) {
    Mat h = Mat::Zero(4, 4);
    h(0, 0) = -s[3] * std::sin(s[0]);
    h(0, 3) = h(3, 0) = std::cos(s[0]);
    h(2, 2) = h(3, 3) = 1.0;
    return h;
  };
  const MagneticLagrangianSystem src(BundleDims(2, 0), l, TwoFormField::zero(2));
  const CompatibleTransformation ct(TransformationPair(1, 1, 0, 0), src, BetaMap{VectorField::constant(Vec::Constant(1, 0.7))},
                                    FiberConnection::flat(1, 1));
  for (const Vec& s1 : test::uniform_probes(3, 10, 9)) EXPECT_NEAR(ct.apply(s1)[3], 0.7 - std::sin(s1[0]), 1e-12);
  // Without exact derivatives the momentum is resolved to the FD noise floor.
  const CompatibleTransformation fd(ct.pair(), src.finite_difference_copy(), ct.beta(), ct.connection());
  for (const Vec& s1 : test::uniform_probes(3, 10, 9)) EXPECT_NEAR(fd.apply(s1)[3], 0.7 - std::sin(s1[0]), 1e-8);
}

TEST(ApplyPsi, CharacterizationAndGuessIndependence) {
  const auto ct = nonlinear_transformation();
  for (const Vec& s1 : nonlinear_probes(20, 10)) {
    EXPECT_LT(ct->characterization_residual(s1).cwiseAbs().maxCoeff(), 1e-10);
    const Vec zero = Vec::Zero(1);
    EXPECT_NEAR(ct->apply(s1)[5], ct->apply_from(s1, zero)[5], 1e-10);
    const Vec s2 = ct->apply(s1);
    EXPECT_EQ(s2.head(2), s1.head(2));
    EXPECT_EQ(s2[2], s1[4]);
    EXPECT_EQ(s2.segment(3, 2), s1.segment(2, 2));
    EXPECT_EQ(s2[6], s1[5]);
  }
}

TEST(TangentMap, ImplicitFunctionTheoremMatchesDifferences) {
  const auto ct = nonlinear_transformation();
  for (const Vec& s1 : nonlinear_probes(10, 11))
    EXPECT_LT(max_abs(ct->tangent_map(s1) - ct->tangent_map_fd(s1, 1e-5)), 1e-7);
}

TEST(InducedSystem, ZeroCovectorIsPlainPullback) {
  const MagneticLagrangianSystem src = nonlinear_source();
  const MagneticLagrangianSystem flat_src(src.dims, src.lagrangian, TwoFormField::zero(4));
  auto ct = std::make_shared<const CompatibleTransformation>(
      TransformationPair(2, 1, 1, 1), flat_src, BetaMap{VectorField::constant(Vec::Zero(1))}, nonlinear_connection());
  const MagneticLagrangianSystem l1 = induced_system(ct);
  for (const Vec& s1 : nonlinear_probes(10, 12)) {
    const Vec s2 = ct->apply(s1);
    EXPECT_NEAR(gradient(src.lagrangian, s2)[5], 0.0, 1e-12);  // critical in vbar
    EXPECT_NEAR(l1.lagrangian.value(s1), src.lagrangian.value(s2), 1e-14);
    EXPECT_EQ(max_abs(l1.magnetic(ct->pair().p1_point(s1)).matrix()), 0.0);
  }
}

TEST(InducedSystem, ExactDerivativesAgreeWithDifferences) {
  const auto ct = nonlinear_transformation();
  const MagneticLagrangianSystem l1 = induced_system(ct);
  EXPECT_LT(cross_check_derivatives(l1.lagrangian, nonlinear_probes(30, 13)).max(), 1e-5);
  EXPECT_LT(closedness_defect(l1.magnetic, test::uniform_probes(5, 20, 14)), 1e-6);
}

TEST(InducedSystem, ThreeBodyRouthianMassMatrix) {
  const ThreeBodyModel tb = test::three_body();
  Mat mass(2, 2);
  mass << 5.0 / 6.0, 0.5, 0.5, 1.5;
  for (bool a0 : {false, true}) {
    const RouthResult rr = test::three_body_routh(tb, 0.5, a0);
    for (const Vec& s : test::intermediate_probes(20, 15))
      EXPECT_LT(max_abs(hessian(rr.intermediate.lagrangian, s).block(2, 2, 2, 2) - mass), 1e-12);
  }
}

// Velocity-linear part of L1 for A0, derived by substituting thetadot from
// J = mu into L - mu (thetadot + cos(psi) phidot).
TEST(InducedSystem, ThreeBodyA0LinearTerms) {
  const ThreeBodyModel tb = test::three_body();
  const RouthResult rr = test::three_body_routh(tb, 0.5, true);
  for (const Vec& s : test::intermediate_probes(20, 16)) {
    Vec rest = s;
    rest.segment(2, 2).setZero();
    const Vec g = gradient(rr.intermediate.lagrangian, rest);
    EXPECT_NEAR(g[2], 0.5 * (5.0 / 6.0 - std::cos(s[1])), 1e-12);
    EXPECT_NEAR(g[3], 0.5 * 3.0 / 6.0, 1e-12);
  }
}

TEST(PullbackIdentities, NonlinearSchemeExactAndFiniteDifference) {
  const auto ct = nonlinear_transformation();
  const std::vector<Vec> probes = nonlinear_probes(50, 17);
  const PullbackReport exact = verify_pullback_identities(*ct, induced_system(ct), probes);
  EXPECT_EQ(exact.probes, 50u);
  EXPECT_LT(exact.omega_violation, 1e-8);
  EXPECT_LT(exact.energy_violation, 1e-8);
  EXPECT_LT(exact.characterization, 1e-10);

  auto fd = std::make_shared<const CompatibleTransformation>(
      ct->pair(), ct->source().finite_difference_copy(), BetaMap{ct->beta().beta.without_exact_derivatives()},
      ct->connection().without_exact_derivatives(), NewtonOptions{1e-9, 50});
  const PullbackReport r =
      verify_pullback_identities(*fd, induced_system(fd).finite_difference_copy(), probes, JacobianMode::FiniteDifference);
  EXPECT_LT(r.omega_violation, 1e-5);
  EXPECT_LT(r.energy_violation, 1e-5);
}

TEST(PullbackIdentities, WrongInducedSystemIsCaught) {
  const auto ct = nonlinear_transformation();
  MagneticLagrangianSystem wrong = induced_system(ct);
  wrong.magnetic = TwoFormField::zero(5);
  const PullbackReport r = verify_pullback_identities(*ct, wrong, nonlinear_probes(10, 18));
  EXPECT_GT(r.omega_violation, 1e-2);
}

TEST(PullbackIdentities, IdentityPair) {
  MechanicalSpec spec = ThreeBodyParams{}.spec();
  spec.group.clear();
  const MagneticLagrangianSystem sys = build_mechanical(spec);
  auto ct = std::make_shared<const CompatibleTransformation>(TransformationPair(3, 0, 0, 0), sys,
                                                             BetaMap{VectorField::constant(Vec(0))}, FiberConnection::flat(3, 0));
  const std::vector<Vec> probes = test::three_body_probes(10, 19);
  for (const Vec& s : probes) EXPECT_EQ(ct->apply(s), s);
  const PullbackReport r = verify_pullback_identities(*ct, induced_system(ct), probes);
  EXPECT_EQ(r.omega_violation, 0.0);
  EXPECT_EQ(r.energy_violation, 0.0);
}

// beta = mu + 0.5 sin(theta) on the three-body scheme.
std::shared_ptr<const CompatibleTransformation> perturbed_three_body(const RouthResult& rr) {
  VectorField beta;
  beta.value = [](const Vec& y) { return Vec::Constant(1, 0.5 + 0.5 * std::sin(y[2])); };
  beta.jacobian = [](const Vec& y) {
    Mat j = Mat::Zero(1, 3);
    j(0, 2) = 0.5 * std::cos(y[2]);
    return j;
  };
  const CompatibleTransformation& ct = *rr.transformation;
  return std::make_shared<const CompatibleTransformation>(ct.pair(), ct.source(), BetaMap{beta}, ct.connection());
}

TEST(Tangency, MomentumBetaIsTangent) {
  const ThreeBodyModel tb = test::three_body();
  for (bool a0 : {false, true}) {
    const RouthResult rr = test::three_body_routh(tb, 0.5, a0);
    const CompatibleTransformation& ct = *rr.transformation;
    const TangencyReport r = verify_tangency(ct, el_flow(ct.source()), test::intermediate_probes(100, 20));
    EXPECT_LT(r.max_defect, 1e-8);
    EXPECT_EQ(r.defect.size(), 100u);
  }
}

TEST(Tangency, PerturbedBetaKeepsEnergyIdentityButIsNotTangent) {
  const ThreeBodyModel tb = test::three_body();
  const RouthResult rr = test::three_body_routh(tb, 0.5, true);
  const auto ct = perturbed_three_body(rr);
  const std::vector<Vec> probes = test::intermediate_probes(50, 21);
  const PullbackReport pb = verify_pullback_identities(*ct, induced_system(ct), probes);
  EXPECT_LT(pb.energy_violation, 1e-8);
  EXPECT_LT(pb.omega_violation, 1e-8);
  EXPECT_GT(verify_tangency(*ct, el_flow(ct->source()), probes).max_defect, 1e-3);
}

TEST(Tangency, ZeroFieldHasZeroDefect) {
  const ThreeBodyModel tb = test::three_body();
  const RouthResult rr = test::three_body_routh(tb, 0.5, true);
  const auto ct = perturbed_three_body(rr);
  const TangencyReport r =
      verify_tangency(*ct, [](const Vec& s) { return Vec(Vec::Zero(s.size())); }, test::intermediate_probes(10, 22));
  EXPECT_EQ(r.max_defect, 0.0);
}

TEST(Tangency, UpstairsProbesMustLieInTheImage) {
  const ThreeBodyModel tb = test::three_body();
  const RouthResult rr = test::three_body_routh(tb, 0.5, false);
  const CompatibleTransformation& ct = *rr.transformation;
  std::vector<Vec> upstairs;
  for (const Vec& s1 : test::intermediate_probes(10, 23)) upstairs.push_back(ct.apply(s1));
  EXPECT_LT(verify_tangency_at_image(ct, el_flow(ct.source()), upstairs).max_defect, 1e-8);
  EXPECT_LT((preimage(ct, upstairs[0]) - test::intermediate_probes(10, 23)[0]).norm(), 1e-14);
  upstairs[3][5] += 0.2;
  EXPECT_ROUTH_ERROR(ErrorKind::NotInImage, verify_tangency_at_image(ct, el_flow(ct.source()), upstairs));
}

TEST(Diffeomorphism, Cases) {
  const ThreeBodyModel tb = test::three_body();
  const RouthResult rr = test::three_body_routh(tb, 0.5, false);
  EXPECT_EQ(check_diffeomorphic(rr.transformation, test::intermediate_probes(5, 24)).status, DiffeoStatus::NotApplicable);

  // L2 = 1/2 (v^2 + vb^2) on s2 = (q, qbar, v, vb); s1 = (q, v, qbar, p).
  const MagneticLagrangianSystem src = test::free_particle(2);
  VectorField beta;
  beta.value = [](const Vec& y) { return Vec::Constant(1, y[2]); };
  beta.jacobian = [](const Vec&) {
    Mat j = Mat::Zero(1, 3);
    j(0, 2) = 1.0;
    return j;
  };
  const TransformationPair pair(1, 1, 0, 1);
  auto diffeo = std::make_shared<const CompatibleTransformation>(pair, src, BetaMap{beta}, FiberConnection::flat(1, 1));
  const std::vector<Vec> probes = test::uniform_probes(4, 10, 25);
  const DiffeoReport ok = check_diffeomorphic(diffeo, probes);
  EXPECT_EQ(ok.status, DiffeoStatus::Diffeomorphic);
  EXPECT_TRUE(ok.induced_hyperregular);
  for (int r : ok.beta_fiber_rank) EXPECT_EQ(r, 1);

  auto constant = std::make_shared<const CompatibleTransformation>(
      pair, src, BetaMap{VectorField::constant(Vec::Constant(1, 0.4))}, FiberConnection::flat(1, 1));
  const DiffeoReport no = check_diffeomorphic(constant, probes);
  EXPECT_EQ(no.status, DiffeoStatus::NotDiffeomorphic);
  EXPECT_STREQ(to_string(no.status), "NOT_DIFFEOMORPHIC");
}

TEST(CompatibleVectors, SharedComponents) {
  const TransformationPair pair(1, 1, 0, 0);
  Vec s1(3), s2(4), y(3), x(4);
  s1 << 0.1, 0.2, 0.3;       // (q, v, qbar)
  s2 << 0.1, 0.3, 0.2, 0.9;  // (q, qbar, v, vb)
  y << 1.0, 2.0, 3.0;
  x << 1.0, 3.0, 2.0, -5.0;
  EXPECT_TRUE(check_compatible_vectors(pair, s1, y, s2, x).holds);
  x[2] = 2.5;
  const CompatibilityCheck c = check_compatible_vectors(pair, s1, y, s2, x);
  EXPECT_FALSE(c.holds);
  EXPECT_NEAR(c.defect, 0.5, 1e-15);
  s2[0] = 0.0;
  EXPECT_ROUTH_ERROR(ErrorKind::NotCompatiblePoints, check_compatible_vectors(pair, s1, y, s2, x));
}

}  // namespace
}  // namespace routh
