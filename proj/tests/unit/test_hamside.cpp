#include <cmath>

#include "routh/hamside.hpp"
#include "support.hpp"

namespace routh {
namespace {

using test::max_abs;

TEST(CovState, PackUnpack) {
  const BundleDims dims(2, 1);
  Vec s(5);
  s << 1, 2, 3, 4, 5;
  const CovStateTPQ c = CovStateTPQ::unpack(dims, s);
  EXPECT_EQ(c.alpha, s.segment(2, 2));
  EXPECT_EQ(c.p[0], 5.0);
  EXPECT_EQ(c.pack(), s);
  EXPECT_ROUTH_ERROR(ErrorKind::InvalidArgument, CovStateTPQ::unpack(dims, Vec::Zero(4)));
}

TEST(HamPresymplectic, CanonicalWithoutMagneticTerm) {
  const Mat m = ham_presymplectic_matrix(BundleDims(2, 0), TwoFormField::zero(2), Vec::Zero(4)).matrix();
  Mat expected = Mat::Zero(4, 4);
  expected.block(2, 0, 2, 2).setIdentity();
  expected.block(0, 2, 2, 2) = -Mat::Identity(2, 2);
  EXPECT_EQ(m, expected);
}

TEST(HamPresymplectic, MagneticBlockAndFiberKernel) {
  const TwoFormField b = TwoFormField::from(2, [](const Vec& x) {
    AntisymMatrix m = AntisymMatrix::zero(2);
    m.set(0, 1, std::cos(x[1]));
    return m;
  });
  Vec s(3);
  s << 0.3, -0.2, 0.7;  // (q, alpha, p)
  const Mat m = ham_presymplectic_matrix(BundleDims(1, 1), b, s).matrix();
  EXPECT_NEAR(m(0, 2), std::cos(0.7), 1e-15);
  EXPECT_EQ(m(1, 0), 1.0);
  // Without B the p direction is the kernel.
  const Mat plain = ham_presymplectic_matrix(BundleDims(1, 1), TwoFormField::zero(2), s).matrix();
  const Mat k = kernel_basis(plain);
  ASSERT_EQ(k.cols(), 1);
  EXPECT_NEAR(std::abs(k(2, 0)), 1.0, 1e-15);
}

TEST(HamVectorField, MechanicalHamiltonEquations) {
  MechanicalSpec spec;
  spec.n = 1;
  spec.mass = Mat::Constant(1, 1, 2.0);
  spec.potential.push_back({0.8, Vec::Constant(1, 1.0)});
  const MagneticHamiltonianSystem h = build_mechanical_hamiltonian(spec);
  for (const Vec& s : test::uniform_probes(2, 10, 1)) {
    const PresymplecticSolution sol = ham_vector_field(h, s);
    // qdot = alpha / m, alphadot = -V'(q) = 0.8 sin q.
    EXPECT_NEAR(sol.solution[0], s[1] / 2.0, 1e-14);
    EXPECT_NEAR(sol.solution[1], 0.8 * std::sin(s[0]), 1e-14);
  }
}

class ThreeBodyScheme : public ::testing::Test {
 protected:
  ThreeBodyModel tb = test::three_body();
  AdaptedScheme scheme(double mu, bool a0) const {
    return make_adapted_scheme(tb.action, Vec::Constant(1, mu), a0 ? tb.a0 : tb.mechanical);
  }
};

TEST_F(ThreeBodyScheme, ApplyPsiPutsMuInTheGroupMomentum) {
  for (bool a0 : {false, true}) {
    const AdaptedScheme sc = scheme(0.5, a0);
    for (const Vec& s1 : test::intermediate_probes(10, 2)) {
      const Vec s2 = apply_psi_ham(sc.pair, sc.connection, sc.beta, s1);
      ASSERT_EQ(s2.size(), 6);
      EXPECT_EQ(s2.head(2), s1.head(2));
      EXPECT_EQ(s2[2], s1[4]);
      EXPECT_EQ(s2[5], 0.5);
    }
  }
}

TEST_F(ThreeBodyScheme, ZeroBetaKeepsTheBaseCovector) {
  const AdaptedScheme sc = scheme(0.0, true);
  const Vec s1 = test::intermediate_probes(1, 3)[0];
  const Vec s2 = apply_psi_ham(sc.pair, sc.connection, sc.beta, s1);
  EXPECT_EQ(s2.segment(3, 2), s1.segment(2, 2));
  EXPECT_EQ(s2[5], 0.0);
}

TEST_F(ThreeBodyScheme, TangentIsAffineInTheCovector) {
  const AdaptedScheme sc = scheme(0.5, true);
  for (const Vec& s1 : test::intermediate_probes(10, 4)) {
    const Mat j = psi_ham_tangent(sc.pair, sc.connection, sc.beta, s1);
    const Mat fd = central_difference_jacobian(
        [&](const Vec& x) { return apply_psi_ham(sc.pair, sc.connection, sc.beta, x); }, s1, 1e-6);
    EXPECT_LT(max_abs(j - fd), 1e-8);
    Vec moved = s1;
    moved.segment(2, 2) += Vec::Constant(2, 3.0);
    EXPECT_LT(max_abs(psi_ham_tangent(sc.pair, sc.connection, sc.beta, moved) - j), 1e-15);
  }
}

TEST_F(ThreeBodyScheme, PullbackOfTheCanonicalForm) {
  const std::vector<Vec> probes = test::intermediate_probes(100, 5);
  const TwoFormField zero = TwoFormField::zero(3);
  EXPECT_LT(verify_ham_pullback(scheme(0.5, false).pair, scheme(0.5, false).connection, scheme(0.5, false).beta,
                                zero, probes)
                .max_violation,
            1e-10);
  const AdaptedScheme a0 = scheme(0.5, true);
  EXPECT_LT(verify_ham_pullback(a0.pair, a0.connection, a0.beta, zero, probes).max_violation, 1e-8);
  const AdaptedScheme flat = scheme(0.0, true);
  EXPECT_LT(verify_ham_pullback(flat.pair, flat.connection, flat.beta, zero, probes).max_violation, 1e-14);
}

TEST_F(ThreeBodyScheme, OmittingTheInducedTermBreaksThePullback) {
  // B1 = 0 is wrong when <beta, A> is not closed: d(mu cos(psi) dphi) != 0.
  const AdaptedScheme sc = scheme(0.5, true);
  double worst = 0.0;
  for (const Vec& s1 : test::intermediate_probes(20, 6)) {
    const Vec s2 = apply_psi_ham(sc.pair, sc.connection, sc.beta, s1);
    const Mat j = psi_ham_tangent(sc.pair, sc.connection, sc.beta, s1);
    const Mat o2 = ham_presymplectic_matrix(sc.pair.dims2(), TwoFormField::zero(3), s2).matrix();
    const Mat o1 = ham_presymplectic_matrix(sc.pair.dims1(), TwoFormField::zero(3), s1).matrix();
    worst = std::max(worst, max_abs(j.transpose() * o2 * j - o1));
    EXPECT_NEAR(max_abs(j.transpose() * o2 * j - o1), 0.5 * std::abs(std::sin(s1[1])), 1e-8);
  }
  EXPECT_GT(worst, 0.1);
}

TEST_F(ThreeBodyScheme, MomentumShift) {
  const Vec mu = Vec::Constant(1, 0.5);
  std::vector<Vec> level;
  for (const Vec& s : test::three_body_probes(50, 7)) level.push_back(project_to_momentum_level(tb.action, mu, s));
  for (const Vec& s : level) {
    EXPECT_NEAR(cotangent_momentum(tb.action, s)[0], 0.5, 1e-14);
    EXPECT_EQ(momentum_shift(tb.a0, Vec::Zero(1), s), s);
  }
  for (const Connection* c : {&tb.mechanical, &tb.a0}) {
    const MomentumShiftReport r = momentum_shift_check(tb.action, mu, *c, level);
    EXPECT_EQ(r.probes, level.size());
    EXPECT_LT(r.shifted_momentum, 1e-12);
    EXPECT_LT(r.round_trip, 1e-12);
    EXPECT_LT(r.level_defect, 1e-12);
  }
}

TEST_F(ThreeBodyScheme, HamiltonianRelatedness) {
  const Vec mu = Vec::Constant(1, 0.5);
  std::vector<Vec> level;
  for (const Vec& s : test::three_body_probes(30, 8)) level.push_back(project_to_momentum_level(tb.action, mu, s));
  EXPECT_LT(hamiltonian_relatedness_defect(tb.hamiltonian, tb.action, mu, tb.mechanical, level), 1e-8);
  EXPECT_LT(hamiltonian_relatedness_defect(tb.hamiltonian, tb.action, mu, tb.a0, level), 1e-8);
}

}  // namespace
}  // namespace routh
