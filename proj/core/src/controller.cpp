#include "ptctk/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ptctk {

namespace {

// Lower clamp on the squared barrier gap of the first-order barrier controller.
constexpr double kBarrierFloor = 1e-12;

void check_system(const SystemSpec& sys) {
  if (sys.n < 1 || sys.n > kMaxBellOrder) {
    throw std::invalid_argument("system order must lie in [1, " +
                                std::to_string(kMaxBellOrder) + "]");
  }
  if (!sys.f || !sys.g) {
    throw std::invalid_argument("system needs both f and g oracles");
  }
}

void check_map_order(const SystemSpec& sys, const TimeMapPair& map) {
  if (map.max_order() < sys.n + 1) {
    throw std::invalid_argument("map max_order " +
                                std::to_string(map.max_order()) +
                                " too small for system order " +
                                std::to_string(sys.n) + " (need n + 1)");
  }
}

double checked_gain(const InputGain& g, const Vector& x, double t) {
  const double gain = g(x, t);
  if (gain == 0.0 || !std::isfinite(gain)) {
    throw ZeroGainError("input gain vanishes or is not finite at t = " +
                        std::to_string(t));
  }
  return gain;
}

}  // namespace

PrescribedTimeController::PrescribedTimeController(
    SystemSpec sys, InfiniteTimeController ctrl,
    std::shared_ptr<const TimeMapPair> map)
    : sys_(std::move(sys)), ctrl_(std::move(ctrl)), map_(std::move(map)) {
  check_system(sys_);
  if (!ctrl_.pi0) throw std::invalid_argument("controller pi0 is not set");
  if (!map_) throw std::invalid_argument("controller needs a time map");
  check_map_order(sys_, *map_);
}

PrescribedTimeController::Evaluation PrescribedTimeController::evaluate(
    const Vector& x, double t) const {
  if (x.size() != sys_.n) {
    throw std::invalid_argument("controller: state dimension mismatch");
  }
  const double dt = t - sys_.t0;
  // kappa jets are domain-guarded; evaluation at or past the horizon throws.
  const auto tr = transform_at(sys_.n, *map_, MapSide::kappa, dt, 0.0);
  Evaluation out;
  out.x_kappa = tr.B * x;
  out.t_kappa = map_->kappa(dt) + sys_.t0;
  out.pi0 = ctrl_.pi0(out.x_kappa, out.t_kappa);
  out.guarded = ctrl_.guard && ctrl_.guard(out.x_kappa, out.t_kappa);
  const double kdot_n = std::pow(map_->kappa_derivative(1, dt), sys_.n);
  out.u = kdot_n / checked_gain(sys_.g, x, t) * (out.pi0 - tr.b.dot(x));
  return out;
}

PrescribedTimeController synthesize_ptc(const SystemSpec& sys,
                                        const InfiniteTimeController& ctrl,
                                        const TimeMapPair& map) {
  return PrescribedTimeController(sys, ctrl,
                                  std::make_shared<const TimeMapPair>(map));
}

AssociatedSystem::AssociatedSystem(SystemSpec sys, InfiniteTimeController ctrl,
                                   std::shared_ptr<const TimeMapPair> map)
    : sys_(std::move(sys)), ctrl_(std::move(ctrl)), map_(std::move(map)) {
  check_system(sys_);
  if (!ctrl_.pi0) throw std::invalid_argument("controller pi0 is not set");
  if (!map_) throw std::invalid_argument("associated system needs a time map");
  check_map_order(sys_, *map_);
}

AssociatedSystem::Evaluation AssociatedSystem::evaluate(double t,
                                                        const Vector& xi) const {
  const int n = sys_.n;
  if (xi.size() != n) {
    throw std::invalid_argument("associated system: state dimension mismatch");
  }
  const double dt = t - sys_.t0;
  const auto tr = transform_at(n, *map_, MapSide::mu, dt, 0.0);
  const double mu_dot = map_->mu_derivative(1, dt);
  if (!(mu_dot > 0.0)) {
    throw std::logic_error("class-M map has non-positive derivative at dt = " +
                           std::to_string(dt));
  }

  Evaluation out;
  out.mu_dot_n = std::pow(mu_dot, n);
  out.xi_mu = tr.B * xi;
  out.t_mu = map_->mu(dt) + sys_.t0;
  out.pi0 = ctrl_.pi0(xi, t);
  out.guarded = ctrl_.guard && ctrl_.guard(xi, t);

  double divisor = out.mu_dot_n;
  if (divisor < kMuDotPowerFloor) {
    divisor = kMuDotPowerFloor;
    out.floor_hit = true;
  }
  const double gain = checked_gain(sys_.g, out.xi_mu, out.t_mu);
  out.u_mu = (out.pi0 / divisor + tr.b.dot(xi)) / gain;

  out.xi_dot.resize(n);
  for (int i = 0; i + 1 < n; ++i) out.xi_dot(i) = xi(i + 1);
  out.xi_dot(n - 1) =
      out.mu_dot_n * sys_.f(out.xi_mu, out.u_mu, out.t_mu) + out.pi0;
  return out;
}

AssociatedSystem associated_system(const SystemSpec& sys,
                                   const InfiniteTimeController& ctrl,
                                   const TimeMapPair& map) {
  return AssociatedSystem(sys, ctrl, std::make_shared<const TimeMapPair>(map));
}

Vector initial_condition_map(const Vector& x0, const TimeMapPair& map) {
  return map_state(x0, map, MapSide::kappa, 0.0, 0.0);
}

StateConstraint::StateConstraint(Envelope zeta, double sigma,
                                 std::shared_ptr<const TimeMapPair> map,
                                 double t0, double x0_norm)
    : zeta_(std::move(zeta)),
      sigma_(sigma),
      map_(std::move(map)),
      t0_(t0),
      x0_norm_(x0_norm) {
  if (!zeta_) throw std::invalid_argument("state constraint needs zeta");
  if (!(sigma_ >= 1.0)) {
    throw std::invalid_argument("state constraint sigma must be >= 1");
  }
  if (!map_) throw std::invalid_argument("state constraint needs a map");
}

double StateConstraint::associated_margin(double t, const Vector& xi) const {
  const double dt = t - t0_;
  const double mapped = map_state(xi, *map_, MapSide::mu, dt, 0.0).norm();
  return sigma_ * x0_norm_ * zeta_(map_->mu(dt)) - mapped;
}

double StateConstraint::prescribed_margin(double t, const Vector& x) const {
  return sigma_ * x0_norm_ * zeta_(t - t0_) - x.norm();
}

bool StateConstraint::associated_holds(double t, const Vector& xi) const {
  return associated_margin(t, xi) >= 0.0;
}

bool StateConstraint::prescribed_holds(double t, const Vector& x) const {
  return prescribed_margin(t, x) >= 0.0;
}

std::size_t StateConstraint::count_violations(const Trajectory& xi_traj) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < xi_traj.size(); ++i) {
    if (!associated_holds(xi_traj.times[i], xi_traj.states[i])) ++count;
  }
  return count;
}

StateConstraint transform_state_constraint(Envelope zeta, double sigma,
                                           const TimeMapPair& map, double t0,
                                           double x0_norm) {
  return StateConstraint(std::move(zeta), sigma,
                         std::make_shared<const TimeMapPair>(map), t0, x0_norm);
}

InputConstraint::InputConstraint(Envelope upsilon, SystemSpec sys,
                                 InfiniteTimeController ctrl,
                                 std::shared_ptr<const TimeMapPair> map)
    : upsilon_(std::move(upsilon)),
      assoc_(sys, std::move(ctrl), std::move(map)),
      t0_(sys.t0) {
  if (!upsilon_) throw std::invalid_argument("input constraint needs upsilon");
}

double InputConstraint::associated_margin(double t, const Vector& xi) const {
  const auto ev = assoc_.evaluate(t, xi);
  return upsilon_(ev.t_mu - t0_) - std::abs(ev.u_mu);
}

double InputConstraint::prescribed_margin(double t, double u) const {
  return upsilon_(t - t0_) - std::abs(u);
}

bool InputConstraint::associated_holds(double t, const Vector& xi) const {
  return associated_margin(t, xi) >= 0.0;
}

bool InputConstraint::prescribed_holds(double t, double u) const {
  return prescribed_margin(t, u) >= 0.0;
}

InputConstraint transform_input_constraint(Envelope upsilon,
                                           const SystemSpec& sys,
                                           const InfiniteTimeController& ctrl,
                                           const TimeMapPair& map) {
  return InputConstraint(std::move(upsilon), sys, ctrl,
                         std::make_shared<const TimeMapPair>(map));
}

bool attractivity_check(const Trajectory& xi_traj, const TimeMapPair& map,
                        double t0, double varsigma,
                        const AttractivityOptions& opts) {
  if (xi_traj.size() < opts.min_samples) {
    throw std::invalid_argument("attractivity_check: trajectory too short (" +
                                std::to_string(xi_traj.size()) + " samples)");
  }
  const double reached = map.mu(xi_traj.end_time() - t0);
  if (reached < opts.min_mu_fraction * map.tau()) {
    throw std::invalid_argument(
        "attractivity_check: trajectory too short, mu(dt) reaches only " +
        std::to_string(reached / map.tau()) + " tau");
  }
  if (std::isinf(varsigma)) return true;
  const std::size_t count = xi_traj.size();
  const std::size_t tail = std::max<std::size_t>(1, count / 10);
  for (std::size_t i = count - tail; i < count; ++i) {
    const double mapped =
        map_state(xi_traj.states[i], map, MapSide::mu, xi_traj.times[i], t0)
            .norm();
    if (!(mapped <= varsigma + opts.tol)) return false;
  }
  return true;
}

InfiniteTimeController example4_pi0(double psi, double phi, double xi0_abs) {
  if (!(psi > 0.0)) throw std::invalid_argument("example4_pi0: psi must be > 0");
  if (!(phi > 1.0)) throw std::invalid_argument("example4_pi0: phi must be > 1");
  const double barrier = phi * xi0_abs;
  auto denominator = [barrier](const Vector& xi) {
    const double gap = std::abs(xi(0)) - barrier;
    return gap * gap;
  };
  InfiniteTimeController ctrl;
  ctrl.description = "-psi*xi/(|xi| - phi|xi(0)|)^2, psi=" + std::to_string(psi) +
                     ", phi=" + std::to_string(phi);
  ctrl.pi0 = [psi, denominator](const Vector& xi, double) {
    return -psi * xi(0) / std::max(denominator(xi), kBarrierFloor);
  };
  ctrl.guard = [denominator](const Vector& xi, double) {
    return denominator(xi) < kBarrierFloor;
  };
  return ctrl;
}

InfiniteTimeController linear_pd(std::vector<double> gains) {
  if (gains.empty()) throw std::invalid_argument("linear_pd: gains required");
  InfiniteTimeController ctrl;
  ctrl.description = "linear state feedback -K xi";
  ctrl.pi0 = [gains = std::move(gains)](const Vector& xi, double) {
    if (static_cast<std::size_t>(xi.size()) != gains.size()) {
      throw std::invalid_argument("linear_pd: gain count != state dimension");
    }
    double u = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
      u -= gains[i] * xi(static_cast<Eigen::Index>(i));
    }
    return u;
  };
  return ctrl;
}

InfiniteTimeController zero_controller() {
  InfiniteTimeController ctrl;
  ctrl.description = "zero";
  ctrl.pi0 = [](const Vector&, double) { return 0.0; };
  return ctrl;
}

}  // namespace ptctk
