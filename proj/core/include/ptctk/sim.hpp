#pragma once

// Adaptive Dormand-Prince 5(4) integration of the prescribed-time closed loop
// and of the associated infinite-time system, plus the cross-check that ties
// the two together.

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "ptctk/controller.hpp"
#include "ptctk/trajectory.hpp"
#include "ptctk/types.hpp"

namespace ptctk {

struct SimOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  /// Prescribed-time runs stop at t0 + tau (1 - epsilon_stop).
  double epsilon_stop = 1e-4;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0: automatic
  /// Associated runs integrate to t0 + horizon_multiplier * kappa((1 - eps) tau).
  double horizon_multiplier = 1.0;
  /// Uniform output samples added to the accepted step endpoints.
  std::size_t grid_points = 200;
  std::size_t max_steps = 2'000'000;

  void validate() const;
};

/// Step-size underflow, non-finite derivatives or step budget exhaustion.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

using OdeRhs = std::function<Vector(double t, const Vector& x)>;

/// Extra per-sample record: input value and guard flags at (t, x).
struct SampleRecord {
  double input = 0.0;
  std::uint8_t flags = kFlagNone;
};
using SampleObserver = std::function<SampleRecord(double t, const Vector& x)>;

/// Integrate x' = rhs(t, x) from t0 to t_end. `horizon` marks a singular time
/// t_h > t0: t_end is clamped to t0 + (t_h - t0)(1 - epsilon_stop) and every
/// step is capped at half the remaining distance to t_h.
Trajectory integrate(const OdeRhs& rhs, const Vector& x0, double t0,
                     double t_end, const SimOptions& opts,
                     std::optional<double> horizon = std::nullopt,
                     const SampleObserver& observer = {});

/// Closed loop x' = chain, x_n' = f(x, u, t) + g(x, t) u, u = pi(x, t), on
/// [t0, t0 + tau (1 - epsilon_stop)].
Trajectory run_prescribed(const SystemSpec& sys,
                          const PrescribedTimeController& pi, const Vector& x0,
                          const SimOptions& opts);

/// Associated infinite-time system over [t0, t0 + T_inf]; inputs record pi0.
Trajectory run_associated(const AssociatedSystem& assoc, const Vector& xi0,
                          const SimOptions& opts);

/// Final infinite-scale time of an associated run.
double associated_horizon(const TimeMapPair& map, const SimOptions& opts);

struct EquivalenceReport {
  double max_error = 0.0;      // max_t || x(t_mu) - B_n[mu(dt)] xi(t) ||
  double threshold = 0.0;      // 100 rel_tol (1 + max ||x||)
  double max_state_norm = 0.0;
  double worst_time = 0.0;     // infinite-scale time of the largest error
  std::size_t grid_points = 0;
  bool passed = false;
  Trajectory prescribed;
  Trajectory associated;
};

/// Runs both systems from matched initial conditions and compares x(t_mu)
/// against B_n[mu(dt)] xi(t) on `grid_points` infinite-scale instants whose
/// images cover [t0, t0 + (1 - exclude_fraction) tau].
EquivalenceReport verify_equivalence(const SystemSpec& sys,
                                     const InfiniteTimeController& ctrl,
                                     const TimeMapPair& map, const Vector& x0,
                                     const SimOptions& opts,
                                     std::size_t grid_points = 200,
                                     double exclude_fraction = 0.01);

/// Terminal error, peak norm, overshoot ratio and the number of samples with
/// h(x, u, t) outside H(t).
TrajectoryMetrics metrics(const Trajectory& traj,
                          const ConstraintSpec* constraint = nullptr);

}  // namespace ptctk
