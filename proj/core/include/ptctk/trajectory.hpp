#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ptctk/types.hpp"

namespace ptctk {

/// Per-sample guard markers recorded alongside a trajectory.
enum SampleFlag : std::uint8_t {
  kFlagNone = 0,
  kFlagMuDotFloor = 1,      // mu'^n fell below its floor while forming u_mu
  kFlagControllerGuard = 2, // the nominal controller clamped a denominator
};

/// One accepted Dormand-Prince step with its continuous extension.
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Vector c0, c1, c2, c3, c4;

  /// Fourth-order continuous extension at t in [t0, t0 + h].
  Vector operator()(double t) const;
};

struct TrajectoryMetrics {
  double terminal_error = 0.0;
  double max_norm = 0.0;
  double overshoot = 0.0;
  std::size_t constraint_violations = 0;
};

/// Sampled solution of an ODE run: strictly increasing times with matching
/// states, inputs and flags, plus the dense output of every accepted step.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> inputs;
  std::vector<std::uint8_t> flags;
  std::vector<DenseStep> steps;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  TrajectoryMetrics metrics;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  int dimension() const {
    return states.empty() ? 0 : static_cast<int>(states.front().size());
  }
  double start_time() const { return times.front(); }
  double end_time() const { return times.back(); }

  /// State at t from the dense output; throws std::out_of_range outside the
  /// recorded interval.
  Vector interpolate(double t) const;
};

/// CSV with header `t,x1,...,xn,u,flag`; 17 significant digits.
void write_csv(const Trajectory& traj, std::ostream& out);
void write_csv(const Trajectory& traj, const std::string& path);

}  // namespace ptctk
