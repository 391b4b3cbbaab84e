#pragma once

// Magnetic Hamiltonian systems on T*_P Q, the momentum-level map
// psi_{A,beta} and the momentum shift.

#include <span>
#include <string>

#include "routh/presym.hpp"
#include "routh/reduction.hpp"

namespace routh {

/// Covector state (q, alpha, p) flattened in that order.
struct CovStateTPQ {
  Vec q;
  Vec alpha;
  Vec p;

  Vec pack() const;
  static CovStateTPQ unpack(const BundleDims& dims, const Vec& s);
};

struct MagneticHamiltonianSystem {
  BundleDims dims;
  ScalarField hamiltonian;
  TwoFormField magnetic;
  std::string id;

  MagneticHamiltonianSystem() = default;
  MagneticHamiltonianSystem(BundleDims dims, ScalarField hamiltonian, TwoFormField magnetic = {},
                            std::string id = {});
};

/// Omega(d/dalpha_i, d/dq^j) = delta_ij plus B on the (q, p) slots.
AntisymMatrix ham_presymplectic_matrix(const BundleDims& dims, const TwoFormField& b, const Vec& s);
AntisymMatrix ham_presymplectic_matrix(const MagneticHamiltonianSystem& sys, const Vec& s);

/// Hamilton's equations i_X Omega = -dH with no gauge pins.
PresymplecticSolution ham_vector_field(const MagneticHamiltonianSystem& sys, const Vec& s);

/// (q, alpha, qbar, pbar, p) -> (q, qbar, alpha + Gamma^T beta, beta, pbar).
Vec apply_psi_ham(const TransformationPair& pair, const FiberConnection& conn, const BetaMap& beta,
                  const Vec& s1);
/// Jacobian of apply_psi_ham at s1.
Mat psi_ham_tangent(const TransformationPair& pair, const FiberConnection& conn, const BetaMap& beta,
                    const Vec& s1);

struct HamPullbackReport {
  double max_violation = 0.0;
  std::size_t probes = 0;
};

/// max |Jpsi^T Omega2 Jpsi - Omega1| with B1 = F^* B2 + d<beta, A_{P1}>.
HamPullbackReport verify_ham_pullback(const TransformationPair& pair, const FiberConnection& conn,
                                      const BetaMap& beta, const TwoFormField& b2, std::span<const Vec> probes);

/// Cotangent-lift momentum map J_b = alpha . (e_b)_Q on T*Q.
Vec cotangent_momentum(const GroupAction& action, const Vec& s);

/// S_mu(alpha) = alpha - A^T mu on T*Q.
Vec momentum_shift(const Connection& conn, const Vec& mu, const Vec& s);

struct MomentumShiftReport {
  double shifted_momentum = 0.0;  ///< max |J(S_mu(s))|
  double round_trip = 0.0;        ///< max |psi(S_mu(s)) - s|
  double level_defect = 0.0;      ///< max |J(s) - mu| of the supplied probes
  std::size_t probes = 0;
};

/// Probes are T*Q states (original coordinate order) on J^{-1}(mu).
MomentumShiftReport momentum_shift_check(const GroupAction& action, const Vec& mu, const Connection& conn,
                                         std::span<const Vec> probes);

/// Moves the group-momentum components of s so that J(s) = mu for a
/// translation action.
Vec project_to_momentum_level(const GroupAction& action, const Vec& mu, const Vec& s);

/// Hamiltonian relatedness on the momentum-shift scheme: with
/// H1 = H2 o psi and B1 as above, a solution X1 downstairs (gauge fixed toward
/// the upstairs group velocities) pushes forward to the Hamiltonian field of
/// H2. Returns max |Tpsi X1 - X2| over probes on J^{-1}(mu).
double hamiltonian_relatedness_defect(const MagneticHamiltonianSystem& full, const GroupAction& action,
                                      const Vec& mu, const Connection& conn, std::span<const Vec> probes);

}  // namespace routh
