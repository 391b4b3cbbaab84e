#pragma once

// Fixed-step integrators for first-order systems xdot = f(x).

#include <functional>
#include <string>

#include "routh/hamside.hpp"
#include "routh/lagrangian.hpp"

namespace routh {

using FlowField = std::function<Vec(const Vec&)>;

/// Number of steps for horizon T at step h; throws InvalidArgument unless
/// h > 0, T >= 0 and T is a whole number of steps (to 1e-9 relative).
long step_count(double h, double t_end);

/// Classical fourth-order Runge-Kutta. Errors raised by the field carry the
/// time of the failing step.
Trajectory integrate_rk4(const FlowField& f, const Vec& s0, double h, double t_end, std::string id = {});

/// Implicit midpoint rule, Newton iteration with a finite-difference
/// Jacobian to 1e-12.
Trajectory integrate_implicit_midpoint(const FlowField& f, const Vec& s0, double h, double t_end,
                                       std::string id = {});

/// EL flow of a system under the given gauge policy.
FlowField el_flow(const MagneticLagrangianSystem& sys, GaugePolicy policy = GaugePolicy::Strict);
/// Hamilton flow; remaining ambiguity raises AmbiguousDynamics.
FlowField hamilton_flow(const MagneticHamiltonianSystem& sys);

Trajectory integrate_rk4(const MagneticLagrangianSystem& sys, const Vec& s0, double h, double t_end);

}  // namespace routh
