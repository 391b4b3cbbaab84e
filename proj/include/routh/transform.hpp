#pragma once

// Compatible transformations psi_{L2,beta} between magnetic Lagrangian
// systems, for transformation pairs that are coordinate projections.
//
// Coordinates. Q1 = (q), Q2 = (q, qbar), P2 = (q, qbar, pbar) and
// P1 = (q, qbar, pbar, p) with dim q = n, dim qbar = k_f, dim pbar = m and
// dim p = k_F. States are laid out as
//   s1 = (q, v, qbar, pbar, p)       on T_{P1} Q1,
//   s2 = (q, qbar, v, vbar, pbar)    on T_{P2} Q2,
// which is the generic (q, v, fiber) layout of each bundle.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "routh/lagrangian.hpp"

namespace routh {

struct TransformationPair {
  int n = 1;    ///< dim Q1
  int k_f = 0;  ///< fiber dimension of f : Q2 -> Q1
  int m = 0;    ///< fiber dimension of P2 -> Q2
  int k_F = 0;  ///< fiber dimension of F : P1 -> P2

  TransformationPair() = default;
  TransformationPair(int n_, int k_f_, int m_, int k_F_);

  BundleDims dims1() const { return {n, k_f + m + k_F}; }
  BundleDims dims2() const { return {n + k_f, m}; }
  int p1_dim() const { return n + k_f + m + k_F; }
  int p2_dim() const { return n + k_f + m; }

  /// P1 point (q, qbar, pbar, p) of a state s1.
  Vec p1_point(const Vec& s1) const;
  /// Q2 point (q, qbar) of a state s1.
  Vec q2_point(const Vec& s1) const;
  /// s2 compatible with s1 whose vbar slot holds `vbar`.
  Vec lift(const Vec& s1, const Vec& vbar) const;
  /// Shared (q, qbar, v, pbar) coordinates of s1, in s1 order.
  Vec shared_of_s1(const Vec& s1) const;
  Vec shared_of_s2(const Vec& s2) const;
  /// s1 built from s2 and the F-fiber coordinates p.
  Vec project(const Vec& s2, const Vec& p) const;
};

/// beta : P1 -> V*f, components beta_a against dqbar^a.
struct BetaMap {
  VectorField beta;  ///< R^{p1_dim} -> R^{k_f}

  Vec operator()(const Vec& p1) const { return beta.value(p1); }
};

/// Connection on f : Q2 -> Q1 as the V f-valued 1-form
/// (dqbar^a + Gamma^a_i dq^i) d/dqbar^a, with Gamma a function of (q, qbar).
struct FiberConnection {
  int n = 1;
  int k_f = 0;
  std::function<Mat(const Vec& q2)> gamma;  ///< k_f x n
  /// Optional exact derivatives: element c is dGamma/dq2^c.
  std::function<std::vector<Mat>(const Vec& q2)> derivative;
  double fd_step = 1e-6;

  Mat operator()(const Vec& q2) const { return gamma(q2); }
  std::vector<Mat> derivatives(const Vec& q2) const;
  FiberConnection without_exact_derivatives() const;
  static FiberConnection flat(int n, int k_f);
};

struct FRegularityReport {
  std::vector<double> determinant;
  std::vector<double> condition;
  bool f_regular = true;
};

/// det and condition number of d2 L2 / dvbar dvbar at each probe s2.
FRegularityReport check_f_regular(const MagneticLagrangianSystem& sys2, const TransformationPair& pair,
                                  std::span<const Vec> probes);

/// Realized map psi_{L2,beta}: shared coordinates are copied and vbar solves
/// dL2/dvbar^a = beta_a(p1) by Newton from the horizontal value
/// vbar = -Gamma v. Immutable and safe to share across threads.
class CompatibleTransformation {
 public:
  CompatibleTransformation(TransformationPair pair, MagneticLagrangianSystem source, BetaMap beta,
                           FiberConnection connection, NewtonOptions newton = {});

  const TransformationPair& pair() const { return pair_; }
  const MagneticLagrangianSystem& source() const { return source_; }
  const BetaMap& beta() const { return beta_; }
  const FiberConnection& connection() const { return connection_; }
  const NewtonOptions& newton_options() const { return newton_; }

  /// vbar solving the momentum equation, from `guess` or the horizontal lift.
  Vec solve_vbar(const Vec& s1, const Vec* guess = nullptr) const;
  Vec apply(const Vec& s1) const;
  Vec apply_from(const Vec& s1, const Vec& guess) const;

  /// dL2/dvbar (psi(s1)) - beta(p1).
  Vec characterization_residual(const Vec& s1) const;

  /// T psi at s1 by the implicit function theorem (shape dim s2 x dim s1).
  Mat tangent_map(const Vec& s1) const;
  /// T psi at s1 by central differences of apply().
  Mat tangent_map_fd(const Vec& s1, double h = 1e-6) const;

  /// dvbar/ds1 at s1 where s2 = psi(s1) and jet2 is the jet of L2 there.
  Mat vbar_derivative(const Vec& s1, const LagrangianJet& jet2) const;

  /// Chain-rule selection s1 -> s2 with the vbar slot left at zero.
  Mat selection() const;

 private:
  TransformationPair pair_;
  MagneticLagrangianSystem source_;
  BetaMap beta_;
  FiberConnection connection_;
  NewtonOptions newton_;
};

/// apply_psi: free-function spelling of CompatibleTransformation::apply.
Vec apply_psi(const CompatibleTransformation& ct, const Vec& s1);

/// Induced system on P1 -> Q1:
///   L1(s1) = L2(psi(s1)) - beta_a(p1) (vbar*^a + Gamma^a_i v^i),
///   B1 = F^* B2 + d( beta_a (dqbar^a + Gamma^a_i dq^i) ).
/// L1 carries exact first and second derivatives assembled from L2, beta and
/// Gamma (envelope identity and implicit-function theorem), so no finite
/// differences pass through the Newton solve.
MagneticLagrangianSystem induced_system(std::shared_ptr<const CompatibleTransformation> ct);

/// B1 alone, on P1 coordinates.
TwoFormField induced_magnetic_form(const CompatibleTransformation& ct);
TwoFormField induced_magnetic_form(const TransformationPair& pair, const BetaMap& beta,
                                   const FiberConnection& connection, const TwoFormField& b2);

enum class JacobianMode { ChainRule, FiniteDifference };

struct PullbackReport {
  double omega_violation = 0.0;   ///< max |Jpsi^T Omega2 Jpsi - Omega1|
  double energy_violation = 0.0;  ///< max |E2(psi(s)) - E1(s)|
  double characterization = 0.0;  ///< max |dL2/dvbar(psi(s)) - beta|
  std::size_t probes = 0;
};

PullbackReport verify_pullback_identities(const CompatibleTransformation& ct,
                                          const MagneticLagrangianSystem& induced,
                                          std::span<const Vec> probes,
                                          JacobianMode mode = JacobianMode::ChainRule);

struct TangencyReport {
  std::vector<double> defect;  ///< max_a |X(dL2/dvbar^a) - Y(beta_a)| per probe
  double max_defect = 0.0;
};

using StateVectorField = std::function<Vec(const Vec&)>;

/// For each probe s1 evaluates X = field(psi(s1)), builds the compatible Y
/// determined by X (any free p-components chosen by least squares) and
/// reports X(dL2/dvbar^a) - Y(beta_a).
TangencyReport verify_tangency(const CompatibleTransformation& ct, const StateVectorField& field,
                               std::span<const Vec> probes);

/// Same check posed at upstairs probes s2; each must lie in the image of psi
/// (k_F == 0), otherwise NotInImage.
TangencyReport verify_tangency_at_image(const CompatibleTransformation& ct,
                                        const StateVectorField& field,
                                        std::span<const Vec> upstairs_probes);

/// s1 with psi(s1) == s2 for k_F == 0; NotInImage when s2 is off the image.
Vec preimage(const CompatibleTransformation& ct, const Vec& s2, double tol = 1e-8);

enum class DiffeoStatus { NotApplicable, Diffeomorphic, NotDiffeomorphic };
const char* to_string(DiffeoStatus status);

struct DiffeoReport {
  DiffeoStatus status = DiffeoStatus::NotApplicable;
  std::vector<int> beta_fiber_rank;  ///< rank of dbeta_a/dp^gamma per probe
  bool induced_hyperregular = false;
};

DiffeoReport check_diffeomorphic(std::shared_ptr<const CompatibleTransformation> ct,
                                 std::span<const Vec> probes);

struct CompatibilityCheck {
  bool holds = false;
  double defect = 0.0;
};

/// Vector compatibility: X at s2 and Y at s1 share their (q, qbar, pbar, v)
/// components. Throws NotCompatiblePoints when s1 and s2 are not compatible.
CompatibilityCheck check_compatible_vectors(const TransformationPair& pair, const Vec& s1,
                                            const Vec& y, const Vec& s2, const Vec& x,
                                            double tol = 1e-8);

}  // namespace routh
