#include "routh/numcore.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace routh {

ScalarField ScalarField::without_exact_derivatives() const {
  ScalarField f;
  f.value = value;
  f.fd_step = fd_step;
  f.fd_hessian_step = fd_hessian_step;
  return f;
}

VectorField VectorField::without_exact_derivatives() const {
  VectorField f;
  f.value = value;
  f.fd_step = fd_step;
  return f;
}

VectorField VectorField::constant(Vec c) {
  VectorField f;
  f.value = [c](const Vec&) { return c; };
  f.jacobian = [c](const Vec& x) { return Mat::Zero(c.size(), x.size()); };
  return f;
}

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, what);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteEvaluation, what);
}

Vec central_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                                double h) {
  if (!(h > 0)) throw Error(ErrorKind::InvalidArgument, "fd step must be positive");
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = f(xp);
    xp[i] = xi - h;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2 * h);
  }
  require_finite(g, "finite-difference gradient");
  return g;
}

Mat central_difference_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                                double h) {
  if (!(h > 0)) throw Error(ErrorKind::InvalidArgument, "fd step must be positive");
  Mat jac;
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const Vec fp = f(xp);
    xp[i] = xi - h;
    const Vec fm = f(xp);
    xp[i] = xi;
    if (i == 0) jac.resize(fp.size(), x.size());
    jac.col(i) = (fp - fm) / (2 * h);
  }
  if (x.size() == 0) jac.resize(f(x).size(), 0);
  if (!jac.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "finite-difference jacobian");
  return jac;
}

Mat second_difference_hessian(const std::function<double(const Vec&)>& f, const Vec& x,
                              double h) {
  const Eigen::Index n = x.size();
  Mat hess(n, n);
  Vec y = x;
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    hess(i, i) = (fp - 2 * f0 + fm) / (h * h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      y[i] = x[i] + h;
      y[j] = x[j] + h;
      const double fpp = f(y);
      y[j] = x[j] - h;
      const double fpm = f(y);
      y[i] = x[i] - h;
      const double fmm = f(y);
      y[j] = x[j] + h;
      const double fmp = f(y);
      y[i] = x[i];
      y[j] = x[j];
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4 * h * h);
    }
  }
  if (!hess.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "finite-difference hessian");
  return hess;
}

GradientEval fd_gradient(const ScalarField& f, const Vec& x) {
  require_finite(f.value(x), "scalar field value");
  Vec fd = central_difference_gradient(f.value, x, f.fd_step);
  if (!f.gradient) return {std::move(fd), std::nullopt};
  Vec exact = f.gradient(x);
  require_finite(exact, "exact gradient");
  const double gap = fd.size() ? (exact - fd).cwiseAbs().maxCoeff() : 0.0;
  return {std::move(exact), gap};
}

Vec gradient(const ScalarField& f, const Vec& x) {
  if (f.gradient) {
    Vec g = f.gradient(x);
    require_finite(g, "exact gradient");
    return g;
  }
  return central_difference_gradient(f.value, x, f.fd_step);
}

Mat hessian(const ScalarField& f, const Vec& x) {
  if (f.hessian) {
    Mat h = f.hessian(x);
    if (!h.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "exact hessian");
    return h;
  }
  if (f.gradient) {
    Mat h = central_difference_jacobian(f.gradient, x, f.fd_step);
    return 0.5 * (h + h.transpose());
  }
  return second_difference_hessian(f.value, x, f.fd_hessian_step);
}

Mat jacobian(const VectorField& f, const Vec& x) {
  if (f.jacobian) {
    Mat j = f.jacobian(x);
    if (!j.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "exact jacobian");
    return j;
  }
  return central_difference_jacobian(f.value, x, f.fd_step);
}

DerivativeCheck cross_check_derivatives(const ScalarField& f, std::span<const Vec> probes) {
  DerivativeCheck check;
  for (const Vec& x : probes) {
    if (f.gradient) {
      const Vec fd = central_difference_gradient(f.value, x, f.fd_step);
      if (fd.size()) check.gradient_gap = std::max(check.gradient_gap,
                                                   (f.gradient(x) - fd).cwiseAbs().maxCoeff());
    }
    if (f.hessian) {
      const Mat fd = f.gradient ? Mat(central_difference_jacobian(f.gradient, x, f.fd_step))
                                : second_difference_hessian(f.value, x, f.fd_hessian_step);
      if (fd.size()) check.hessian_gap = std::max(check.hessian_gap,
                                                  (f.hessian(x) - fd).cwiseAbs().maxCoeff());
    }
  }
  return check;
}

double cross_check_jacobian(const VectorField& f, std::span<const Vec> probes) {
  double gap = 0.0;
  if (!f.jacobian) return gap;
  for (const Vec& x : probes) {
    const Mat fd = central_difference_jacobian(f.value, x, f.fd_step);
    if (fd.size()) gap = std::max(gap, (f.jacobian(x) - fd).cwiseAbs().maxCoeff());
  }
  return gap;
}

// ---------------------------------------------------------------------------

AntisymMatrix::AntisymMatrix(const Mat& m) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::InvalidArgument, "antisymmetric matrix must be square");
  m_ = 0.5 * (m - m.transpose());
}

AntisymMatrix AntisymMatrix::zero(int dim) {
  AntisymMatrix a;
  a.m_ = Mat::Zero(dim, dim);
  return a;
}

void AntisymMatrix::set(int i, int j, double value) {
  if (i == j) {
    m_(i, i) = 0.0;
    return;
  }
  m_(i, j) = value;
  m_(j, i) = -value;
}

double AntisymMatrix::pair(const Vec& x, const Vec& y) const {
  double sum = 0.0;
  for (int i = 0; i < dim(); ++i)
    for (int j = i + 1; j < dim(); ++j) sum += m_(i, j) * (x[i] * y[j] - x[j] * y[i]);
  return sum;
}

AntisymMatrix AntisymMatrix::operator+(const AntisymMatrix& other) const {
  AntisymMatrix r;
  r.m_ = m_ + other.m_;
  return r;
}

AntisymMatrix AntisymMatrix::operator-(const AntisymMatrix& other) const {
  AntisymMatrix r;
  r.m_ = m_ - other.m_;
  return r;
}

// ---------------------------------------------------------------------------

NewtonResult newton_solve(const std::function<Vec(const Vec&)>& residual,
                          const std::function<Mat(const Vec&)>& jacobian, const Vec& x0,
                          const NewtonOptions& options) {
  NewtonResult result{x0, 0, 0.0};
  Vec r = residual(result.x);
  require_finite(r, "newton residual");
  result.residual_norm = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  while (result.residual_norm > options.tol) {
    if (result.iterations >= options.max_iter) {
      std::ostringstream msg;
      msg << "no convergence after " << options.max_iter << " iterations, residual "
          << result.residual_norm;
      throw NoConvergenceError(msg.str(), result.residual_norm);
    }
    const Mat jac = jacobian(result.x);
    if (!jac.allFinite()) throw Error(ErrorKind::NonFiniteEvaluation, "newton jacobian");
    Eigen::JacobiSVD<Mat> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-14 * sv[0] || sv[0] == 0.0)
      throw Error(ErrorKind::SingularJacobian, "newton jacobian is singular");
    result.x -= svd.solve(r);
    ++result.iterations;
    r = residual(result.x);
    require_finite(r, "newton residual");
    result.residual_norm = r.cwiseAbs().maxCoeff();
  }
  return result;
}

// ---------------------------------------------------------------------------

namespace {

int rank_from_singular_values(const Vec& sv) {
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  const double cut = kRankThreshold * sv[0];
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++r;
  return r;
}

}  // namespace

LsqResult constrained_lsq_solve(const Mat& m, const Vec& b, const PartialAssignment& fixed) {
  const Eigen::Index dim = m.cols();
  if (m.rows() != b.size())
    throw Error(ErrorKind::InvalidArgument, "matrix rows and right-hand side differ");
  std::vector<bool> pinned(dim, false);
  Vec x = Vec::Zero(dim);
  for (const auto& [idx, value] : fixed) {
    if (idx < 0 || idx >= dim) throw Error(ErrorKind::InvalidArgument, "pinned index out of range");
    pinned[idx] = true;
    x[idx] = value;
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (!pinned[i]) free.push_back(i);

  const Vec rhs = b - m * x;
  Mat sub(m.rows(), static_cast<Eigen::Index>(free.size()));
  for (std::size_t c = 0; c < free.size(); ++c) sub.col(c) = m.col(free[c]);

  LsqResult result;
  const Eigen::Index nfree = sub.cols();
  if (nfree == 0 || m.rows() == 0) {
    result.kernel_basis = Mat::Zero(dim, 0);
    for (Eigen::Index i = 0; i < dim; ++i)
      if (!pinned[i]) {
        result.kernel_basis.conservativeResize(dim, result.kernel_basis.cols() + 1);
        result.kernel_basis.col(result.kernel_basis.cols() - 1) = Vec::Unit(dim, i);
      }
    result.consistent = rhs.size() == 0 || rhs.norm() <= kConsistencyTolerance * (1 + rhs.norm());
  } else {
    Eigen::JacobiSVD<Mat> svd(sub, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    const int rank = rank_from_singular_values(sv);
    const Mat& u = svd.matrixU();
    const Mat& v = svd.matrixV();

    Vec xfree = Vec::Zero(nfree);
    for (int i = 0; i < rank; ++i) xfree += v.col(i) * (u.col(i).dot(rhs) / sv[i]);

    double worst = 0.0;
    for (Eigen::Index i = rank; i < u.cols(); ++i) worst = std::max(worst, std::abs(u.col(i).dot(rhs)));
    result.consistent = worst <= kConsistencyTolerance * (1 + rhs.norm());

    for (std::size_t c = 0; c < free.size(); ++c) x[free[c]] = xfree[c];
    result.kernel_basis = Mat::Zero(dim, nfree - rank);
    for (Eigen::Index k = rank; k < nfree; ++k)
      for (std::size_t c = 0; c < free.size(); ++c) result.kernel_basis(free[c], k - rank) = v(c, k);
  }
  result.solution = x;
  const Vec res = m * x - b;
  result.residual = res.size() ? res.cwiseAbs().maxCoeff() : 0.0;
  if (!fixed.empty() && !result.consistent)
    throw Error(ErrorKind::InconsistentConstraint, "pinned values are incompatible with M x = b");
  return result;
}

LsqResult constrained_lsq_solve(const AntisymMatrix& m, const Vec& b, const PartialAssignment& fixed) {
  return constrained_lsq_solve(m.matrix(), b, fixed);
}

Mat kernel_basis(const Mat& m) {
  if (m.cols() == 0) return Mat::Zero(0, 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const int rank = rank_from_singular_values(svd.singularValues());
  return svd.matrixV().rightCols(m.cols() - rank);
}

int numerical_rank(const Mat& m) {
  if (m.size() == 0) return 0;
  return rank_from_singular_values(Eigen::JacobiSVD<Mat>(m).singularValues());
}

double condition_number(const Mat& m) {
  if (m.size() == 0) return 1.0;
  const Vec sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  const double smin = sv[sv.size() - 1];
  if (smin <= kRankThreshold * sv[0] || sv[0] == 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / smin;
}

}  // namespace routh
