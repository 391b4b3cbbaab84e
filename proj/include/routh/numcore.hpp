#pragma once

// Dense numerical substrate: derivative providers, antisymmetric bilinear
// forms, Newton root finding and gauge-constrained least squares.

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "routh/errors.hpp"

namespace routh {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Scalar field with optional exact first and second derivatives.
///
/// Missing derivatives fall back to central differences. First derivatives
/// use `fd_step`. Second derivatives difference the exact gradient with
/// `fd_step` when one is available, and otherwise take second differences of
/// the value with the larger `fd_hessian_step` (rounding in a 1e-6 second
/// difference would be of order 1e-4).
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  double fd_step = 1e-6;
  double fd_hessian_step = 1e-4;

  bool has_exact_gradient() const { return static_cast<bool>(gradient); }
  bool has_exact_hessian() const { return static_cast<bool>(hessian); }

  /// Same value callback with the exact derivatives removed.
  ScalarField without_exact_derivatives() const;
};

/// Vector-valued field R^m -> R^r with an optional exact Jacobian.
struct VectorField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;
  double fd_step = 1e-6;

  bool has_exact_jacobian() const { return static_cast<bool>(jacobian); }
  VectorField without_exact_derivatives() const;

  static VectorField constant(Vec c);
};

/// Result of `fd_gradient`: the gradient that should be used, plus the
/// max-norm discrepancy against central differences when an exact callback
/// was available.
struct GradientEval {
  Vec gradient;
  std::optional<double> fd_residual;
};

GradientEval fd_gradient(const ScalarField& f, const Vec& x);

/// Exact gradient when present, central differences otherwise.
Vec gradient(const ScalarField& f, const Vec& x);
Mat hessian(const ScalarField& f, const Vec& x);
Mat jacobian(const VectorField& f, const Vec& x);

Vec central_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                                double h);
Mat central_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                                double h);
Mat second_difference_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
                              double h);

/// Max componentwise gap between exact and FD first/second derivatives of
/// `f` over `probes`. Returns 0 for fields without exact callbacks.
struct DerivativeCheck {
  double gradient_gap = 0.0;
  double hessian_gap = 0.0;
  double max() const { return std::max(gradient_gap, hessian_gap); }
};
DerivativeCheck cross_check_derivatives(const ScalarField& f, std::span<const Vec> probes);
double cross_check_jacobian(const VectorField& f, std::span<const Vec> probes);

void require_finite(const Vec& v, const char* what);
void require_finite(double v, const char* what);

/// Square matrix that is antisymmetric by construction. The input is
/// projected onto its antisymmetric part, so entries[i][j] == -entries[j][i]
/// holds bitwise.
class AntisymMatrix {
 public:
  AntisymMatrix() = default;
  explicit AntisymMatrix(const Mat& m);
  static AntisymMatrix zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  /// Sets entry (i, j) to `value` and (j, i) to `-value`.
  void set(int i, int j, double value);

  /// x^T M y, summed over i < j so that pair(x, y) == -pair(y, x) exactly.
  double pair(const Vec& x, const Vec& y) const;

  /// Contraction i_X M as a covector: component j is M(x, e_j).
  Vec contract(const Vec& x) const { return m_.transpose() * x; }

  AntisymMatrix operator+(const AntisymMatrix& other) const;
  AntisymMatrix operator-(const AntisymMatrix& other) const;

 private:
  Mat m_;
};

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 50;
};

struct NewtonResult {
  Vec x;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Plain (undamped) Newton iteration until ||residual||_inf <= tol.
/// Throws SingularJacobian, NoConvergence (with the last residual norm) or
/// NonFiniteEvaluation.
NewtonResult newton_solve(const std::function<Vec(const Vec&)>& residual,
                          const std::function<Mat(const Vec&)>& jacobian, const Vec& x0,
                          const NewtonOptions& options = {});

/// Indices pinned to given values in a linear solve.
using PartialAssignment = std::vector<std::pair<int, double>>;

struct LsqResult {
  Vec solution;
  /// Orthonormal columns spanning the solution ambiguity. Pinned slots are
  /// zero; with no pins this spans ker(M).
  Mat kernel_basis;
  bool consistent = true;
  double residual = 0.0;
};

/// Relative singular-value threshold used for every rank decision.
inline constexpr double kRankThreshold = 1e-10;
/// Relative tolerance of the b-orthogonal-to-cokernel consistency test.
inline constexpr double kConsistencyTolerance = 1e-9;

/// Minimum-norm solution of M x = b subject to x[i] = value for the pinned
/// entries. Rank decisions use singular values below 1e-10 sigma_max.
/// consistent is true iff the reduced right-hand side is orthogonal to the
/// left kernel within 1e-9 (1 + ||b||). An inconsistent system with pins
/// throws InconsistentConstraint; without pins it is reported.
LsqResult constrained_lsq_solve(const Mat& m, const Vec& b, const PartialAssignment& fixed = {});
LsqResult constrained_lsq_solve(const AntisymMatrix& m, const Vec& b,
                                const PartialAssignment& fixed = {});

/// Orthonormal basis of ker(M) with the shared relative threshold.
Mat kernel_basis(const Mat& m);
int numerical_rank(const Mat& m);
/// sigma_max / sigma_min, +inf for singular input.
double condition_number(const Mat& m);

}  // namespace routh
