#include "routh/integrators.hpp"

#include <cmath>

namespace routh {

long step_count(double h, double t_end) {
  if (!(h > 0) || !std::isfinite(h)) throw Error(ErrorKind::InvalidArgument, "step must be positive");
  if (!(t_end >= 0) || !std::isfinite(t_end)) throw Error(ErrorKind::InvalidArgument, "horizon must be non-negative");
  const double ratio = t_end / h;
  const long steps = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
    throw Error(ErrorKind::InvalidArgument, "horizon is not a whole number of steps");
  return steps;
}

namespace {

template <class Step>
Trajectory march(const Vec& s0, double h, double t_end, std::string id, Step step) {
  require_finite(s0, "initial state");
  const long steps = step_count(h, t_end);
  Trajectory traj;
  traj.system_id = std::move(id);
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(s0);
  Vec x = s0;
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    try {
      x = step(x);
      require_finite(x, "integrated state");
    } catch (Error& e) {
      e.set_failing_time(t);
      throw;
    }
    traj.times.push_back(static_cast<double>(k + 1) * h);
    traj.states.push_back(x);
  }
  return traj;
}

}  // namespace

Trajectory integrate_rk4(const FlowField& f, const Vec& s0, double h, double t_end, std::string id) {
  return march(s0, h, t_end, std::move(id), [&](const Vec& x) -> Vec {
    const Vec k1 = f(x);
    const Vec k2 = f(x + 0.5 * h * k1);
    const Vec k3 = f(x + 0.5 * h * k2);
    const Vec k4 = f(x + h * k3);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  });
}

Trajectory integrate_implicit_midpoint(const FlowField& f, const Vec& s0, double h, double t_end,
                                       std::string id) {
  return march(s0, h, t_end, std::move(id), [&](const Vec& x) -> Vec {
    auto residual = [&](const Vec& y) -> Vec { return y - x - h * f(0.5 * (x + y)); };
    auto jac = [&](const Vec& y) -> Mat {
      const Mat jf = central_difference_jacobian([&](const Vec& z) { return f(z); }, 0.5 * (x + y), 1e-7);
      return Mat::Identity(y.size(), y.size()) - 0.5 * h * jf;
    };
    return newton_solve(residual, jac, Vec(x + h * f(x)), {1e-12, 50}).x;
  });
}

FlowField el_flow(const MagneticLagrangianSystem& sys, GaugePolicy policy) {
  return [sys, policy](const Vec& s) { return el_vector_field(sys, s, policy).xdot; };
}

FlowField hamilton_flow(const MagneticHamiltonianSystem& sys) {
  return [sys](const Vec& s) {
    const PresymplecticSolution sol = ham_vector_field(sys, s);
    if (sol.gauge_basis.cols() > 0)
      throw AmbiguousDynamicsError("Hamilton's equations leave the flow undetermined", sol.gauge_basis);
    return sol.solution;
  };
}

Trajectory integrate_rk4(const MagneticLagrangianSystem& sys, const Vec& s0, double h, double t_end) {
  validate_state(sys.dims, s0);
  return integrate_rk4(el_flow(sys), s0, h, t_end, sys.id);
}

}  // namespace routh
