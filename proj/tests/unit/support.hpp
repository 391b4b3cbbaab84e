#pragma once

// Shared fixtures for the unit tests.

#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "routh/errors.hpp"
#include "routh/lagrangian.hpp"
#include "routh/models.hpp"
#include "routh/reduction.hpp"

namespace routh::test {

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Kind of the Error thrown by `f`, or nullopt when nothing is thrown.
inline std::optional<ErrorKind> error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

#define EXPECT_ROUTH_ERROR(kind, stmt) EXPECT_EQ(::routh::test::error_kind([&] { (void)(stmt); }), (kind))

inline std::vector<Vec> uniform_probes(int dim, int count, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> out;
  for (int i = 0; i < count; ++i) {
    Vec v(dim);
    for (int j = 0; j < dim; ++j) v[j] = u(rng);
    out.push_back(v);
  }
  return out;
}

// L = 1/2 |v|^2 on R^n (optionally with a fiber of dimension k the
// Lagrangian ignores).
inline MagneticLagrangianSystem free_particle(int n, int k = 0) {
  ScalarField l;
  l.value = [n](const Vec& s) { return 0.5 * s.segment(n, n).squaredNorm(); };
  l.gradient = [n](const Vec& s) {
    Vec g = Vec::Zero(s.size());
    g.segment(n, n) = s.segment(n, n);
    return g;
  };
  l.hessian = [n](const Vec& s) {
    Mat h = Mat::Zero(s.size(), s.size());
    h.block(n, n, n, n).setIdentity();
    return h;
  };
  return MagneticLagrangianSystem(BundleDims(n, k), l, TwoFormField::zero(n + k), {}, "free");
}

inline ThreeBodyModel three_body() { return build_three_body(ThreeBodyParams{}); }

// Three-body states (theta, phi, psi, thetadot, phidot, psidot).
inline std::vector<Vec> three_body_probes(int count, std::uint64_t seed) {
  std::vector<Vec> out = uniform_probes(6, count, seed);
  for (Vec& s : out) s.head(3) *= std::numbers::pi;
  return out;
}

// Intermediate states (phi, psi, phidot, psidot, theta).
inline std::vector<Vec> intermediate_probes(int count, std::uint64_t seed) {
  std::vector<Vec> out = uniform_probes(5, count, seed);
  for (Vec& s : out) {
    s.head(2) *= std::numbers::pi;
    s[4] *= std::numbers::pi;
  }
  return out;
}

inline RouthResult three_body_routh(const ThreeBodyModel& tb, double mu, bool a0) {
  return routh_reduce(tb.system, tb.action, Vec::Constant(1, mu), a0 ? tb.a0 : tb.mechanical);
}

}  // namespace routh::test
