#pragma once

#include <optional>
#include <string>
#include <vector>

#include "routh/numcore.hpp"

namespace routh {

/// Time-stamped state sequence on a fiber-product state space. Times are
/// uniform: times[k] = t0 + k h.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::string system_id;
  std::optional<Vec> momentum_tag;

  std::size_t size() const { return states.size(); }
  double step() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  /// Throws InvalidArgument unless steps are uniform within 1e-12 and all
  /// states share one length.
  void validate() const;

  /// Component `i` of every state.
  std::vector<double> component(int i) const;
};

/// a - b reduced to (-pi, pi].
double angle_difference(double a, double b);

}  // namespace routh
