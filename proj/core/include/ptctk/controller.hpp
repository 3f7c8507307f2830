#pragma once

// Prescribed-time controller synthesis from a user-supplied infinite-time
// controller, the associated infinite-time system, and the constraint
// transforms between the two time scales.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ptctk/time_maps.hpp"
#include "ptctk/trajectory.hpp"
#include "ptctk/transform.hpp"
#include "ptctk/types.hpp"

namespace ptctk {

/// Unknown matched dynamics f(x, u, t): one concrete member of the admissible
/// family, used only inside simulation.
using Disturbance = std::function<double(const Vector& x, double u, double t)>;
/// Known input gain g(x, t); must be nonzero wherever evaluated.
using InputGain = std::function<double(const Vector& x, double t)>;

/// Normal-form system: x_i' = x_{i+1}, x_n' = f(x, u, t) + g(x, t) u.
struct SystemSpec {
  int n = 1;
  Disturbance f;
  InputGain g;
  double t0 = 0.0;
};

/// pi0(xi, t) designed for the infinite-time chain of integrators. `guard`,
/// when set, reports whether pi0 clamped an internal denominator at (xi, t).
struct InfiniteTimeController {
  std::function<double(const Vector& xi, double t)> pi0;
  std::string description;
  std::function<bool(const Vector& xi, double t)> guard;
};

/// Output constraint h(x, u, t) in H(t).
struct ConstraintSpec {
  std::function<Vector(const Vector& x, double u, double t)> h;
  std::function<bool(const Vector& value, double t)> H;
};

/// Thrown when the input gain vanishes at an evaluation point.
class ZeroGainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// u = kappa'(dt)^n / g(x, t) * (pi0(x_kappa, t_kappa) - b_n[kappa(dt)]^T x)
/// with x_kappa = B_n[kappa(dt)] x and t_kappa = kappa(dt) + t0.
class PrescribedTimeController {
 public:
  struct Evaluation {
    double u = 0.0;
    Vector x_kappa;
    double t_kappa = 0.0;
    double pi0 = 0.0;
    bool guarded = false;
  };

  PrescribedTimeController(SystemSpec sys, InfiniteTimeController ctrl,
                           std::shared_ptr<const TimeMapPair> map);

  double operator()(const Vector& x, double t) const { return evaluate(x, t).u; }
  Evaluation evaluate(const Vector& x, double t) const;

  double tau() const { return map_->tau(); }
  double t0() const { return sys_.t0; }
  const TimeMapPair& map() const { return *map_; }

 private:
  SystemSpec sys_;
  InfiniteTimeController ctrl_;
  std::shared_ptr<const TimeMapPair> map_;
};

PrescribedTimeController synthesize_ptc(const SystemSpec& sys,
                                        const InfiniteTimeController& ctrl,
                                        const TimeMapPair& map);

/// Floor applied to mu'(dt)^n when it divides pi0 in u_mu.
inline constexpr double kMuDotPowerFloor = 1e-300;

/// xi_i' = xi_{i+1}, xi_n' = mu'(dt)^n f(xi_mu, u_mu, t_mu) + pi0(xi, t).
class AssociatedSystem {
 public:
  struct Evaluation {
    Vector xi_dot;
    Vector xi_mu;
    double u_mu = 0.0;
    double t_mu = 0.0;
    double pi0 = 0.0;
    double mu_dot_n = 0.0;
    bool floor_hit = false;
    bool guarded = false;
  };

  AssociatedSystem(SystemSpec sys, InfiniteTimeController ctrl,
                   std::shared_ptr<const TimeMapPair> map);

  Vector operator()(double t, const Vector& xi) const {
    return evaluate(t, xi).xi_dot;
  }
  Evaluation evaluate(double t, const Vector& xi) const;

  const TimeMapPair& map() const { return *map_; }
  const SystemSpec& system() const { return sys_; }

 private:
  SystemSpec sys_;
  InfiniteTimeController ctrl_;
  std::shared_ptr<const TimeMapPair> map_;
};

AssociatedSystem associated_system(const SystemSpec& sys,
                                   const InfiniteTimeController& ctrl,
                                   const TimeMapPair& map);

/// xi(t0) = B_n[kappa(0)] x0.
Vector initial_condition_map(const Vector& x0, const TimeMapPair& map);

/// Decay envelope zeta(dt) >= 0 on [0, tau).
using Envelope = std::function<double(double dt)>;

/// ||x(t)|| <= sigma ||x(t0)|| zeta(dt) on the prescribed scale, and its
/// image ||B_n[mu(dt)] xi(t)|| <= sigma ||x(t0)|| zeta(mu(dt)) on the
/// infinite scale.
class StateConstraint {
 public:
  StateConstraint(Envelope zeta, double sigma,
                  std::shared_ptr<const TimeMapPair> map, double t0,
                  double x0_norm);

  /// Infinite-scale test at time t for associated state xi.
  bool associated_holds(double t, const Vector& xi) const;
  /// Prescribed-scale test at time t for original state x.
  bool prescribed_holds(double t, const Vector& x) const;
  /// Signed slack of the infinite-scale test (bound minus mapped norm).
  double associated_margin(double t, const Vector& xi) const;
  double prescribed_margin(double t, const Vector& x) const;

  /// Number of samples of an associated trajectory violating the test.
  std::size_t count_violations(const Trajectory& xi_traj) const;

 private:
  Envelope zeta_;
  double sigma_;
  std::shared_ptr<const TimeMapPair> map_;
  double t0_;
  double x0_norm_;
};

StateConstraint transform_state_constraint(Envelope zeta, double sigma,
                                           const TimeMapPair& map, double t0,
                                           double x0_norm);

/// |u| <= upsilon(dt) on the prescribed scale, and on the infinite scale
/// |pi0(xi, t) / mu'(dt)^n + b_n[mu(dt)]^T xi| / |g(xi_mu, t_mu)| <=
/// upsilon(mu(dt)).
class InputConstraint {
 public:
  InputConstraint(Envelope upsilon, SystemSpec sys, InfiniteTimeController ctrl,
                  std::shared_ptr<const TimeMapPair> map);

  bool associated_holds(double t, const Vector& xi) const;
  bool prescribed_holds(double t, double u) const;
  double associated_margin(double t, const Vector& xi) const;
  double prescribed_margin(double t, double u) const;

 private:
  Envelope upsilon_;
  AssociatedSystem assoc_;
  double t0_;
};

InputConstraint transform_input_constraint(Envelope upsilon,
                                           const SystemSpec& sys,
                                           const InfiniteTimeController& ctrl,
                                           const TimeMapPair& map);

struct AttractivityOptions {
  /// Absolute slack added to the error bound.
  double tol = 1e-9;
  /// The run must reach an infinite-scale time whose image mu(dt) covers at
  /// least this fraction of tau.
  double min_mu_fraction = 0.99;
  std::size_t min_samples = 10;
};

/// True iff ||B_n[mu(dt)] xi(t)|| <= varsigma + tol over the final 10% of the
/// samples. Throws std::invalid_argument when the trajectory is too short.
bool attractivity_check(const Trajectory& xi_traj, const TimeMapPair& map,
                        double t0, double varsigma,
                        const AttractivityOptions& opts = {});

/// pi0(xi) = -psi xi_1 / (|xi_1| - phi |xi_1(0)|)^2 (scalar systems); the
/// squared denominator is clamped below at 1e-12.
InfiniteTimeController example4_pi0(double psi, double phi, double xi0_abs);

/// pi0(xi) = -sum_i k_i xi_i.
InfiniteTimeController linear_pd(std::vector<double> gains);

InfiniteTimeController zero_controller();

}  // namespace ptctk
