#include <cmath>

#include "routh/integrators.hpp"
#include "support.hpp"

namespace routh {
namespace {

using test::max_abs;

TEST(MomentumMap, ThreeBodyClosedForm) {
  const ThreeBodyModel tb = test::three_body();
  for (const Vec& s : test::three_body_probes(20, 1))
    EXPECT_NEAR(momentum_map(tb.system, tb.action, s)[0], 6 * s[3] + 5 * s[4] + 3 * s[5], 1e-13);
}

TEST(MomentumMap, RestAndConstantPotential) {
  const MagneticLagrangianSystem sys = test::free_particle(2);
  const GroupAction action = GroupAction::translations(2, {0});
  Vec s = Vec::Zero(4);
  s.head(2) << 0.3, -0.4;
  EXPECT_EQ(momentum_map(sys, action, s)[0], 0.0);
  const BgPotential delta{VectorField::constant(Vec::Constant(1, 0.7))};
  EXPECT_NEAR(momentum_map(sys, action, s, &delta)[0], -0.7, 1e-15);
}

TEST(MomentumMap, ConservedAlongThreeBodyFlow) {
  const ThreeBodyModel tb = test::three_body();
  const Vec s0 = three_body_state_on_level(tb.params, 0.0, 0.3, -0.2, 0.1, 0.05, 0.5);
  const Trajectory t = integrate_rk4(tb.system, s0, 1e-3, 2.0);
  for (const Vec& s : t.states) EXPECT_NEAR(momentum_map(tb.system, tb.action, s)[0], 0.5, 1e-8);
}

TEST(GRegularity, ThreeBodyAndDegenerateCases) {
  const ThreeBodyModel tb = test::three_body();
  const GRegularityReport r = check_G_regular(tb.system, tb.action, test::three_body_probes(10, 2));
  EXPECT_TRUE(r.regular);
  for (const Mat& j : r.jacobian) EXPECT_NEAR(j(0, 0), 6.0, 1e-13);

  // Linear in the symmetry velocity.
  ScalarField l;
  l.value = [](const Vec& s) { return s[2] + 0.5 * s[3] * s[3]; };
  const MagneticLagrangianSystem lin(BundleDims(2, 0), l, TwoFormField::zero(2));
  EXPECT_FALSE(check_G_regular(lin, GroupAction::translations(2, {0}), test::uniform_probes(4, 3, 3)).regular);
}

TEST(GRegularity, MechanicalMetricsAreRegular) {
  MechanicalSpec spec;
  spec.n = 3;
  const Mat a = Mat::Random(3, 3);
  spec.mass = a * a.transpose() + Mat::Identity(3, 3);
  spec.group = {0, 2};
  const MagneticLagrangianSystem sys = build_mechanical(spec);
  const GRegularityReport r = check_G_regular(sys, GroupAction::translations(3, {0, 2}), test::uniform_probes(6, 10, 4));
  EXPECT_TRUE(r.regular);
  for (const Mat& j : r.jacobian) EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(j).eigenvalues().minCoeff(), 0.0);
}

TEST(MechanicalConnection, ThreeBodyCoefficients) {
  for (const ThreeBodyParams& p : {ThreeBodyParams{}, ThreeBodyParams{0.4, 1.7, 2.5, 1, 1, 0}}) {
    const ThreeBodyModel tb = build_three_body(p);
    const Connection conn = mechanical_connection(tb.system, tb.action);
    const double sum = p.total();
    for (const Vec& q : test::uniform_probes(3, 5, 5)) {
      const Mat a = conn(q);
      EXPECT_NEAR(a(0, 0), 1.0, 1e-14);
      EXPECT_NEAR(a(0, 1), (p.I2 + p.I3) / sum, 1e-14);
      EXPECT_NEAR(a(0, 2), p.I3 / sum, 1e-14);
      EXPECT_LT(max_abs(a - tb.mechanical(q)), 1e-14);
    }
  }
  const ThreeBodyModel tb = test::three_body();
  const Mat a = tb.mechanical(Vec::Zero(3));
  EXPECT_NEAR(a(0, 1), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(a(0, 2), 0.5, 1e-15);
}

TEST(MechanicalConnection, FreeParticleOnCircle) {
  const MagneticLagrangianSystem sys = test::free_particle(1);
  const Connection conn = mechanical_connection(sys, GroupAction::translations(1, {0}));
  EXPECT_EQ(conn(Vec::Zero(1))(0, 0), 1.0);
}

TEST(MechanicalConnection, ConnectionInvariant) {
  const ThreeBodyModel tb = test::three_body();
  const std::vector<Vec> qs = test::uniform_probes(3, 20, 6, -3.0, 3.0);
  EXPECT_LT(connection_defect(tb.mechanical, tb.action, qs), 1e-10);
  EXPECT_LT(connection_defect(tb.a0, tb.action, qs), 1e-10);
}

TEST(MechanicalConnection, RejectsNonMechanicalLagrangians) {
  ScalarField l;
  l.value = [](const Vec& s) { return -0.5 * s[2] * s[2] + 0.5 * s[3] * s[3]; };
  const MagneticLagrangianSystem indefinite(BundleDims(2, 0), l, TwoFormField::zero(2));
  EXPECT_ROUTH_ERROR(ErrorKind::NotMechanical, mechanical_connection(indefinite, GroupAction::translations(2, {0})));
  ScalarField quartic;
  quartic.value = [](const Vec& s) { return 0.25 * std::pow(s[2], 4) + 0.5 * s[2] * s[2] + 0.5 * s[3] * s[3]; };
  const MagneticLagrangianSystem velocity_dependent(BundleDims(2, 0), quartic, TwoFormField::zero(2));
  EXPECT_ROUTH_ERROR(ErrorKind::NotMechanical,
                     mechanical_connection(velocity_dependent, GroupAction::translations(2, {0})));
}

TEST(ConnectionOneForm, CurvatureOfBothConnections) {
  const ThreeBodyModel tb = test::three_body();
  const Vec mu = Vec::Constant(1, 0.5);
  for (const Vec& q : test::uniform_probes(3, 10, 7, -3.0, 3.0)) {
    const ContractedConnection m = connection_one_form_mu(tb.mechanical, mu, q);
    EXPECT_LT(max_abs(m.curvature.matrix()), 1e-12);
    EXPECT_NEAR(m.covector[1], 0.5 * 5.0 / 6.0, 1e-15);
    const ContractedConnection z = connection_one_form_mu(tb.a0, mu, q);
    EXPECT_NEAR(z.covector[1], 0.5 * std::cos(q[2]), 1e-15);
    // d(mu cos(psi) dphi) = mu sin(psi) dphi ^ dpsi.
    EXPECT_NEAR(z.curvature(1, 2), 0.5 * std::sin(q[2]), 1e-9);
    EXPECT_NEAR(z.curvature(0, 1), 0.0, 1e-12);
    const ContractedConnection zero = connection_one_form_mu(tb.a0, Vec::Zero(1), q);
    EXPECT_EQ(zero.covector.norm(), 0.0);
    EXPECT_EQ(max_abs(zero.curvature.matrix()), 0.0);
  }
}

TEST(BgPotential, ConstantPotentialWithoutMagneticTerm) {
  const GroupAction action = GroupAction::translations(2, {1});
  const BgPotential delta{VectorField::constant(Vec::Constant(1, 2.0))};
  EXPECT_LT(verify_bg_potential(TwoFormField::zero(2), action, delta, test::uniform_probes(2, 10, 8)).max_violation,
            1e-12);
}

// On P = (q, p) with the action translating p, B = f(q) dq ^ dp gives
// i_{d/dp} B = -f(q) dq, so delta = -F with F' = f works.
TEST(BgPotential, LineIntegratedPotentialPasses) {
  const GroupAction action = GroupAction::translations(2, {1});
  const TwoFormField b = TwoFormField::from(2, [](const Vec& x) {
    AntisymMatrix m = AntisymMatrix::zero(2);
    m.set(0, 1, std::cos(x[0]));
    return m;
  });
  VectorField d;
  d.value = [](const Vec& x) { return Vec::Constant(1, -std::sin(x[0])); };
  EXPECT_LT(verify_bg_potential(b, action, BgPotential{d}, test::uniform_probes(2, 20, 9)).max_violation, 1e-9);
  VectorField wrong;
  wrong.value = [](const Vec& x) { return Vec::Constant(1, std::sin(x[0])); };
  EXPECT_GT(verify_bg_potential(b, action, BgPotential{wrong}, test::uniform_probes(2, 20, 9)).max_violation, 1e-2);
}

TEST(BgPotential, NonExactContractionFails) {
  // i_{d/dp3} B = q1 dq2 on R^3 is not closed, so no delta exists.
  const GroupAction action = GroupAction::translations(3, {2});
  const TwoFormField b = TwoFormField::from(3, [](const Vec& x) {
    AntisymMatrix m = AntisymMatrix::zero(3);
    m.set(2, 1, x[0]);
    return m;
  });
  VectorField d;
  d.value = [](const Vec& x) { return Vec::Constant(1, x[0] * x[1]); };
  EXPECT_GT(verify_bg_potential(b, action, BgPotential{d}, test::uniform_probes(3, 10, 10)).max_violation, 1e-3);
}

TEST(Cocycle, AbelianConstantPotentialVanishes) {
  const GroupAction action = GroupAction::translations(3, {0, 1});
  const BgPotential delta{VectorField::constant(Vec::Constant(2, 1.0))};
  EXPECT_LT(max_abs(infinitesimal_cocycle(action, delta, Vec::Zero(3))), 1e-15);
  VectorField lin;
  lin.value = [](const Vec& x) { return Vec(Vec::Map(std::vector<double>{x[1], 0.0}.data(), 2)); };
  // Sigma(xi_0, xi_1) = -xi_0(delta_1) = 0, Sigma(xi_1, xi_0) = -xi_1(delta_0) = -1.
  const Mat s = infinitesimal_cocycle(action, BgPotential{lin}, Vec::Zero(3));
  EXPECT_NEAR(s(1, 0), -1.0, 1e-9);
}

TEST(GroupAction, StructureConstantsAndFreeness) {
  GroupAction so3;
  so3.g_dim = 3;
  so3.space_dim = 3;
  so3.sigma = [](const Vec& x) {
    Mat m(3, 3);
    m << 0, x[2], -x[1], -x[2], 0, x[0], x[1], -x[0], 0;
    return m;
  };
  so3.structure_constants.assign(27, 0.0);
  auto set = [&](int a, int b, int c, double v) { so3.structure_constants[(a * 3 + b) * 3 + c] = v; };
  set(0, 1, 2, 1);
  set(0, 2, 1, -1);
  set(1, 2, 0, 1);
  set(1, 0, 2, -1);
  set(2, 0, 1, 1);
  set(2, 1, 0, -1);
  validate_action(so3);
  EXPECT_FALSE(so3.abelian());
  Vec e1 = Vec::Zero(3), e2 = Vec::Zero(3);
  e1[1] = 1;
  e2[2] = 1;
  EXPECT_NEAR(so3.bracket(e1, e2)[0], 1.0, 1e-15);
  // Rotations are never free on R^3 (rank 2 generators).
  EXPECT_ROUTH_ERROR(ErrorKind::NotFreeAction, check_free(so3, test::uniform_probes(3, 3, 11)));

  so3.structure_constants[(0 * 3 + 1) * 3 + 2] = 2.0;
  EXPECT_ROUTH_ERROR(ErrorKind::InvalidArgument, validate_action(so3));
  EXPECT_TRUE(GroupAction::translations(3, {0}).abelian());
}

TEST(Invariance, ThreeBodyIsThetaInvariant) {
  const ThreeBodyModel tb = test::three_body();
  EXPECT_LT(invariance_defect(tb.system, tb.action, test::three_body_probes(20, 12)), 1e-10);
  MechanicalSpec spec = tb.params.spec();
  spec.group.clear();
  spec.potential.push_back({0.3, Vec::Unit(3, 0)});
  const MagneticLagrangianSystem broken = build_mechanical(spec);
  EXPECT_GT(invariance_defect(broken, tb.action, test::three_body_probes(20, 12)), 1e-3);
}

}  // namespace
}  // namespace routh
