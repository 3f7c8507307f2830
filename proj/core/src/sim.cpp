#include "ptctk/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace ptctk {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432,
                 d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072,
                 d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 10.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vector eval_rhs(const OdeRhs& rhs, double t, const Vector& x) {
  Vector dx = rhs(t, x);
  if (dx.size() != x.size()) {
    throw IntegrationError("rhs returned wrong dimension at t = " + fmt(t), t);
  }
  if (!dx.allFinite()) {
    throw IntegrationError("non-finite rhs value at t = " + fmt(t), t);
  }
  return dx;
}

double error_norm(const Vector& err, const Vector& y0, const Vector& y1,
                  const SimOptions& opts) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        opts.abs_tol + opts.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / scale;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
}

// Starting step from the derivative scale (Hairer, Norsett, Wanner II.4).
double initial_step(const OdeRhs& rhs, double t0, const Vector& y0,
                    const Vector& f0, double span, const SimOptions& opts) {
  const Vector scale = (opts.abs_tol + opts.rel_tol * y0.array().abs()).matrix();
  const double nd = std::max<Eigen::Index>(1, y0.size());
  const double d0 = std::sqrt((y0.array() / scale.array()).square().sum() / nd);
  const double d1n = std::sqrt((f0.array() / scale.array()).square().sum() / nd);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, span);
  const Vector y1 = y0 + h0 * f0;
  const Vector f1 = eval_rhs(rhs, t0 + h0, y1);
  const double d2 =
      std::sqrt(((f1 - f0).array() / scale.array()).square().sum() / nd) / h0;
  const double m = std::max(d1n, d2);
  const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                               : std::pow(0.01 / m, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span});
}

}  // namespace

void SimOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("integration tolerances must be positive");
  }
  if (!(epsilon_stop > 0.0 && epsilon_stop < 1.0)) {
    throw std::invalid_argument("epsilon_stop must lie in (0, 1)");
  }
  if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be > 0");
  if (!(horizon_multiplier > 0.0)) {
    throw std::invalid_argument("horizon_multiplier must be > 0");
  }
}

Vector DenseStep::operator()(double t) const {
  const double theta = h == 0.0 ? 0.0 : (t - t0) / h;
  const double theta1 = 1.0 - theta;
  return c0 + theta * (c1 + theta1 * (c2 + theta * (c3 + theta1 * c4)));
}

Vector Trajectory::interpolate(double t) const {
  if (empty() || t < times.front() || t > times.back()) {
    throw std::out_of_range("interpolation time " + fmt(t) +
                            " outside recorded range");
  }
  if (steps.empty()) return states.front();
  auto it = std::upper_bound(
      steps.begin(), steps.end(), t,
      [](double value, const DenseStep& s) { return value < s.t0; });
  if (it != steps.begin()) --it;
  return (*it)(t);
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const int n = traj.dimension();
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << ",u,flag\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << fmt(traj.times[k]);
    for (int i = 0; i < n; ++i) out << ',' << fmt(traj.states[k](i));
    out << ',' << fmt(traj.inputs[k]) << ',' << static_cast<int>(traj.flags[k])
        << '\n';
  }
}

void write_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(traj, file);
  if (!file) throw std::runtime_error("failed writing " + path);
}

Trajectory integrate(const OdeRhs& rhs, const Vector& x0, double t0,
                     double t_end, const SimOptions& opts,
                     std::optional<double> horizon,
                     const SampleObserver& observer) {
  opts.validate();
  if (!x0.allFinite()) throw std::invalid_argument("initial state not finite");
  if (horizon) {
    if (!(*horizon > t0)) {
      throw std::invalid_argument("integration horizon must exceed t0");
    }
    t_end = std::min(t_end, t0 + (*horizon - t0) * (1.0 - opts.epsilon_stop));
  }
  if (!(t_end >= t0)) throw std::invalid_argument("t_end must be >= t0");

  Trajectory traj;
  auto record = [&](double t, const Vector& x) {
    if (!traj.times.empty() && !(t > traj.times.back())) return;
    SampleRecord rec;
    if (observer) rec = observer(t, x);
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(rec.input);
    traj.flags.push_back(rec.flags);
  };
  record(t0, x0);
  if (t_end == t0) return traj;

  std::vector<double> grid;
  if (opts.grid_points >= 2) {
    for (std::size_t i = 1; i + 1 < opts.grid_points; ++i) {
      grid.push_back(t0 + (t_end - t0) * static_cast<double>(i) /
                              static_cast<double>(opts.grid_points - 1));
    }
  }
  std::size_t next_grid = 0;

  double t = t0;
  Vector y = x0;
  Vector k1 = eval_rhs(rhs, t, y);
  double h = opts.initial_step > 0.0
                 ? opts.initial_step
                 : initial_step(rhs, t, y, k1, t_end - t0, opts);
  bool last_rejected = false;

  while (t < t_end) {
    if (traj.accepted_steps + traj.rejected_steps >= opts.max_steps) {
      throw IntegrationError("step budget exhausted at t = " + fmt(t), t);
    }
    h = std::min(h, opts.max_step);
    if (horizon) h = std::min(h, 0.5 * (*horizon - t));
    bool final_step = false;
    if (t + h >= t_end) {
      h = t_end - t;
      final_step = true;
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(t));
    if (h < h_min && !final_step) {
      throw IntegrationError("step size underflow at t = " + fmt(t), t);
    }

    const Vector k2 = eval_rhs(rhs, t + c2 * h, y + h * (a21 * k1));
    const Vector k3 = eval_rhs(rhs, t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vector k4 =
        eval_rhs(rhs, t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = eval_rhs(
        rhs, t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = eval_rhs(
        rhs, t + h,
        y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vector y1 =
        y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double t1 = final_step ? t_end : t + h;
    const Vector k7 = eval_rhs(rhs, t1, y1);
    const Vector err =
        h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double en = error_norm(err, y, y1, opts);

    if (!std::isfinite(en)) {
      throw IntegrationError("non-finite error estimate at t = " + fmt(t), t);
    }
    if (en <= 1.0) {
      DenseStep step;
      step.t0 = t;
      step.h = t1 - t;
      const Vector ydiff = y1 - y;
      const Vector bspl = h * k1 - ydiff;
      step.c0 = y;
      step.c1 = ydiff;
      step.c2 = bspl;
      step.c3 = ydiff - h * k7 - bspl;
      step.c4 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

      while (next_grid < grid.size() && grid[next_grid] < t1) {
        if (grid[next_grid] > t) record(grid[next_grid], step(grid[next_grid]));
        ++next_grid;
      }
      traj.steps.push_back(std::move(step));
      ++traj.accepted_steps;
      t = t1;
      y = y1;
      k1 = k7;
      record(t, y);

      double factor = en == 0.0 ? kMaxFactor
                                : kSafety * std::pow(en, -1.0 / 5.0);
      factor = std::clamp(factor, kMinFactor, kMaxFactor);
      if (last_rejected) factor = std::min(factor, 1.0);
      last_rejected = false;
      h *= factor;
    } else {
      ++traj.rejected_steps;
      last_rejected = true;
      h *= std::max(kMinFactor, kSafety * std::pow(en, -1.0 / 5.0));
    }
  }
  return traj;
}

Trajectory run_prescribed(const SystemSpec& sys,
                          const PrescribedTimeController& pi, const Vector& x0,
                          const SimOptions& opts) {
  if (x0.size() != sys.n) {
    throw std::invalid_argument("run_prescribed: x0 dimension mismatch");
  }
  const int n = sys.n;
  OdeRhs rhs = [&](double t, const Vector& x) {
    const double u = pi(x, t);
    Vector dx(n);
    for (int i = 0; i + 1 < n; ++i) dx(i) = x(i + 1);
    dx(n - 1) = sys.f(x, u, t) + sys.g(x, t) * u;
    return dx;
  };
  SampleObserver observer = [&](double t, const Vector& x) {
    const auto ev = pi.evaluate(x, t);
    return SampleRecord{ev.u, ev.guarded ? kFlagControllerGuard : kFlagNone};
  };
  const double horizon = sys.t0 + pi.tau();
  Trajectory traj =
      integrate(rhs, x0, sys.t0, horizon, opts, horizon, observer);
  traj.metrics = metrics(traj);
  return traj;
}

double associated_horizon(const TimeMapPair& map, const SimOptions& opts) {
  return opts.horizon_multiplier *
         map.kappa((1.0 - opts.epsilon_stop) * map.tau());
}

Trajectory run_associated(const AssociatedSystem& assoc, const Vector& xi0,
                          const SimOptions& opts) {
  const auto& sys = assoc.system();
  if (xi0.size() != sys.n) {
    throw std::invalid_argument("run_associated: xi0 dimension mismatch");
  }
  OdeRhs rhs = [&](double t, const Vector& xi) { return assoc(t, xi); };
  SampleObserver observer = [&](double t, const Vector& xi) {
    const auto ev = assoc.evaluate(t, xi);
    std::uint8_t flags = kFlagNone;
    if (ev.floor_hit) flags |= kFlagMuDotFloor;
    if (ev.guarded) flags |= kFlagControllerGuard;
    return SampleRecord{ev.pi0, flags};
  };
  const double t_end = sys.t0 + associated_horizon(assoc.map(), opts);
  Trajectory traj =
      integrate(rhs, xi0, sys.t0, t_end, opts, std::nullopt, observer);
  traj.metrics = metrics(traj);
  return traj;
}

EquivalenceReport verify_equivalence(const SystemSpec& sys,
                                     const InfiniteTimeController& ctrl,
                                     const TimeMapPair& map, const Vector& x0,
                                     const SimOptions& opts,
                                     std::size_t grid_points,
                                     double exclude_fraction) {
  if (grid_points < 2) {
    throw std::invalid_argument("verify_equivalence: need >= 2 grid points");
  }
  if (!(exclude_fraction > opts.epsilon_stop && exclude_fraction < 1.0)) {
    throw std::invalid_argument(
        "verify_equivalence: exclude_fraction must exceed epsilon_stop");
  }
  const auto shared_map = std::make_shared<const TimeMapPair>(map);
  const PrescribedTimeController pi(sys, ctrl, shared_map);
  const AssociatedSystem assoc(sys, ctrl, shared_map);

  EquivalenceReport report;
  report.prescribed = run_prescribed(sys, pi, x0, opts);
  report.associated =
      run_associated(assoc, initial_condition_map(x0, map), opts);

  for (const auto& x : report.prescribed.states) {
    report.max_state_norm = std::max(report.max_state_norm, x.norm());
  }
  const double t_last =
      sys.t0 + map.kappa((1.0 - exclude_fraction) * map.tau());
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double t = sys.t0 + (t_last - sys.t0) * static_cast<double>(j) /
                                  static_cast<double>(grid_points - 1);
    const double dt = t - sys.t0;
    const double t_mu = map.mu(dt) + sys.t0;
    const Vector x = report.prescribed.interpolate(t_mu);
    const Vector xi_mu =
        map_state(report.associated.interpolate(t), map, MapSide::mu, dt, 0.0);
    const double e = (x - xi_mu).norm();
    if (e > report.max_error) {
      report.max_error = e;
      report.worst_time = t;
    }
  }
  report.grid_points = grid_points;
  report.threshold = 100.0 * opts.rel_tol * (1.0 + report.max_state_norm);
  report.passed = report.max_error <= report.threshold;
  return report;
}

TrajectoryMetrics metrics(const Trajectory& traj,
                          const ConstraintSpec* constraint) {
  if (traj.empty()) throw std::invalid_argument("metrics: empty trajectory");
  TrajectoryMetrics m;
  for (const auto& x : traj.states) m.max_norm = std::max(m.max_norm, x.norm());
  m.terminal_error = traj.states.back().norm();
  const double initial = traj.states.front().norm();
  m.overshoot = initial > 0.0 ? m.max_norm / initial : 0.0;
  if (constraint != nullptr && constraint->h && constraint->H) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Vector value =
          constraint->h(traj.states[i], traj.inputs[i], traj.times[i]);
      if (!constraint->H(value, traj.times[i])) ++m.constraint_violations;
    }
  }
  return m;
}

}  // namespace ptctk
