#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ptctk/controller.hpp"
#include "ptctk/sim.hpp"

using namespace ptctk;

namespace {

constexpr double kE = std::numbers::e;

Disturbance zero_f() {
  return [](const Vector&, double, double) { return 0.0; };
}
InputGain unit_gain() {
  return [](const Vector&, double) { return 1.0; };
}
Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

// Benchmark plant term a(x, u, t) + b u.
Disturbance example4_f(double b) {
  return [b](const Vector& x, double u, double t) {
    return 0.1 - t * t * t * std::exp(-t) * std::sin(x(0) / (u + 0.001)) + b * u;
  };
}

}  // namespace

TEST_CASE("first-order synthesis reduces to a scaled nominal law") {
  const double tau = 1.5;
  const double t0 = 0.5;
  const auto map = kappa_log({{{1.0, kE}, {0.3, 4.0}}, tau}, 3);
  InfiniteTimeController ctrl;
  ctrl.pi0 = [](const Vector& xi, double t) { return -2.0 * xi(0) + std::sin(t); };
  const double g = 1.7;
  SystemSpec sys{1, zero_f(), [g](const Vector&, double) { return g; }, t0};
  const auto pi = synthesize_ptc(sys, ctrl, map);
  for (double t : {0.5, 0.9, 1.6}) {
    const double dt = t - t0;
    const Vector x = vec({0.8});
    const double want = map.kappa_derivative(1, dt) / g *
                        (-2.0 * 0.8 + std::sin(map.kappa(dt) + t0));
    CHECK(pi(x, t) == doctest::Approx(want).epsilon(1e-14));
  }
  CHECK(pi.tau() == tau);
  CHECK(pi.t0() == t0);
}

TEST_CASE("zero nominal law at the origin gives zero input") {
  const auto map = mu_exp({{{kE, 1.0}}, 1.0}, 4);
  SystemSpec sys{3, zero_f(), unit_gain(), 0.0};
  const auto pi = synthesize_ptc(sys, zero_controller(), map);
  CHECK(pi(Vector::Zero(3), 0.3) == 0.0);
}

TEST_CASE("benchmark controller matches its closed form") {
  std::mt19937_64 rng(13);
  const double psi = 20.0, phi = 1.1, x0 = 1.0, g = 1.0;
  for (double tau : {1.0, 2.0, 3.0}) {
    const auto map = kappa_log({{{1.0, kE}}, tau}, 2);
    SystemSpec sys{1, example4_f(-0.5), [g](const Vector&, double) { return g; }, 0.0};
    const auto ctrl = example4_pi0(psi, phi, std::abs(x0));
    CHECK(ctrl.description.find("psi") != std::string::npos);
    CHECK(ctrl.description.find("phi") != std::string::npos);
    const auto pi = synthesize_ptc(sys, ctrl, map);
    std::uniform_real_distribution<double> xs(-1.0, 1.0);
    std::uniform_real_distribution<double> ts(0.0, 0.999 * tau);
    for (int i = 0; i < 100; ++i) {
      const double x = xs(rng);
      const double t = ts(rng);
      const double gap = std::abs(x) - phi * std::abs(x0);
      const double want = -psi * x / (g * (tau - t) * gap * gap);
      CHECK(oracle::strict_rel_err(pi(vec({x}), t), want) <= 1e-12);
    }
  }
}

TEST_CASE("controller evaluation guards") {
  const auto map = kappa_log({{{1.0, kE}}, 1.0}, 3);
  SystemSpec sys{2, zero_f(), unit_gain(), 0.0};
  const auto pi = synthesize_ptc(sys, linear_pd({1.0, 2.0}), map);
  CHECK_THROWS_AS(pi(vec({1.0, 0.0}), 1.0), DomainError);
  CHECK_THROWS_AS(pi(vec({1.0}), 0.5), std::invalid_argument);

  SystemSpec zero_gain{1, zero_f(), [](const Vector&, double) { return 0.0; }, 0.0};
  const auto bad = synthesize_ptc(zero_gain, zero_controller(), map);
  CHECK_THROWS_AS(bad(vec({1.0}), 0.2), ZeroGainError);

  SystemSpec third{3, zero_f(), unit_gain(), 0.0};
  CHECK_THROWS_AS(synthesize_ptc(third, zero_controller(), map), std::invalid_argument);
  CHECK_THROWS_AS(synthesize_ptc(SystemSpec{0, zero_f(), unit_gain(), 0.0},
                                 zero_controller(), map),
                  std::invalid_argument);
  InfiniteTimeController empty;
  CHECK_THROWS_AS(synthesize_ptc(sys, empty, map), std::invalid_argument);
}

TEST_CASE("associated system without disturbance is a driven chain") {
  const auto map = mu_exp({{{kE, 1.0}, {2.0, 2.0}}, 2.0}, 4);
  SystemSpec sys{3, zero_f(), unit_gain(), 0.0};
  const auto ctrl = linear_pd({1.0, 3.0, 3.0});
  const auto assoc = associated_system(sys, ctrl, map);
  const Vector xi = vec({0.4, -0.2, 1.1});
  const Vector d = assoc(0.7, xi);
  CHECK(d(0) == -0.2);
  CHECK(d(1) == 1.1);
  CHECK(d(2) == doctest::Approx(-(0.4 + 3.0 * -0.2 + 3.0 * 1.1)));
}

TEST_CASE("benchmark associated dynamics") {
  const double tau = 2.0, b = -0.5, g = 1.0;
  const auto map = kappa_log({{{1.0, kE}}, tau}, 2);
  SystemSpec sys{1, example4_f(b), [g](const Vector&, double) { return g; }, 0.0};
  const auto ctrl = example4_pi0(20.0, 1.1, 1.0);
  const auto assoc = associated_system(sys, ctrl, map);
  for (double t : {0.0, 0.4, 1.5, 4.0}) {
    const Vector xi = vec({0.6 * std::exp(-t)});
    const auto ev = assoc.evaluate(t, xi);
    const double mu_dot = tau * std::exp(-t);
    const double t_mu = tau * (1.0 - std::exp(-t));
    const double pi0 = ctrl.pi0(xi, t);
    const double u_mu = pi0 / (mu_dot * g);
    const double a = 0.1 - std::pow(t_mu, 3) * std::exp(-t_mu) * std::sin(xi(0) / (u_mu + 0.001));
    const double want = mu_dot * a + (b / g + 1.0) * pi0;
    CHECK(oracle::rel_err(ev.xi_dot(0), want) <= 1e-12);
    CHECK(ev.t_mu == doctest::Approx(t_mu));
    CHECK(ev.mu_dot_n == doctest::Approx(mu_dot));
    CHECK_FALSE(ev.floor_hit);
  }
}

TEST_CASE("associated dynamics at the initial instant") {
  const auto map = mu_exp({{{kE, 1.0}}, 1.0}, 3);
  const double t0 = 1.0;
  Disturbance f = [](const Vector& x, double u, double t) { return x(0) * x(1) + 0.5 * u + t; };
  SystemSpec sys{2, f, unit_gain(), t0};
  const auto ctrl = linear_pd({2.0, 1.0});
  const auto assoc = associated_system(sys, ctrl, map);
  const Vector xi = vec({0.3, 0.8});
  const auto ev = assoc.evaluate(t0, xi);
  // At dt = 0 the single-term map has mu' = 1, mu'' = -1.
  const Matrix B = bell_matrix(2, map.jet(MapSide::mu, 0.0, 2));
  const Vector xi_mu = B * xi;
  const double pi0 = -(2.0 * 0.3 + 0.8);
  const double u_mu = pi0 + bell_vector(2, map.jet(MapSide::mu, 0.0, 2)).dot(xi);
  CHECK(ev.xi_dot(1) == doctest::Approx(f(xi_mu, u_mu, t0) + pi0).epsilon(1e-14));
  CHECK(ev.t_mu == t0);
}

TEST_CASE("mu-power floor is flagged far out on the infinite scale") {
  const auto map = mu_exp({{{kE, 1.0}}, 1.0}, 4);
  SystemSpec sys{1, zero_f(), unit_gain(), 0.0};
  const auto assoc = associated_system(sys, linear_pd({1.0}), map);
  // mu' = e^{-t} drops below 1e-300 once t > 691.
  const auto ev = assoc.evaluate(700.0, vec({1.0}));
  CHECK(ev.floor_hit);
  CHECK(std::isfinite(ev.u_mu));
  CHECK(std::isfinite(ev.xi_dot(0)));
}

TEST_CASE("initial-condition map") {
  const auto log1 = kappa_log({{{1.0, kE}}, 1.0}, 4);
  CHECK(initial_condition_map(vec({2.0}), log1)(0) == 2.0);
  CHECK(initial_condition_map(Vector::Zero(3), log1).norm() == 0.0);
  const Vector x0 = vec({1.0, -2.0});
  CHECK((initial_condition_map(x0, log1) - x0).norm() <= 1e-15);
  const auto log2 = kappa_log({{{1.0, kE}}, 2.0}, 4);
  // kappa'(0) = 1/2 doubles the velocity on the infinite scale.
  CHECK(initial_condition_map(x0, log2)(1) == doctest::Approx(-4.0));
}

TEST_CASE("state-constraint predicate") {
  const double tau = 1.0;
  const auto map = kappa_log({{{1.0, kE}}, tau}, 3);
  const auto unit = transform_state_constraint([](double) { return 1.0; }, 1.0, map, 0.0, 1.0);
  CHECK(unit.associated_holds(0.0, vec({1.0})));
  CHECK_FALSE(unit.associated_holds(0.5, vec({1.2})));
  CHECK(unit.prescribed_holds(0.3, vec({-0.9})));

  const auto decay = transform_state_constraint(
      [tau](double dt) { return 1.0 - dt / tau; }, 1.0, map, 0.0, 1.0);
  // mu(t) = 1 - e^{-t}: the envelope at infinite-scale t is e^{-t}.
  CHECK(decay.associated_holds(2.0, vec({0.99 * std::exp(-2.0)})));
  CHECK_FALSE(decay.associated_holds(2.0, vec({1.01 * std::exp(-2.0)})));
  CHECK(decay.associated_margin(2.0, vec({0.0})) == doctest::Approx(std::exp(-2.0)));

  Trajectory zero;
  for (int i = 0; i < 5; ++i) {
    zero.times.push_back(i);
    zero.states.push_back(Vector::Zero(1));
  }
  CHECK(decay.count_violations(zero) == 0);
  CHECK_THROWS_AS(transform_state_constraint([](double) { return 1.0; }, 0.5, map, 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("input-constraint predicate") {
  const auto map = kappa_log({{{1.0, kE}}, 1.0}, 3);
  SystemSpec sys{1, zero_f(), unit_gain(), 0.0};
  const auto none = transform_input_constraint([](double) { return 0.0; }, sys,
                                               zero_controller(), map);
  CHECK(none.associated_holds(3.0, vec({5.0})));

  const auto inf = transform_input_constraint(
      [](double) { return std::numeric_limits<double>::infinity(); }, sys,
      linear_pd({100.0}), map);
  CHECK(inf.associated_holds(3.0, vec({5.0})));
  CHECK(inf.prescribed_holds(0.5, 1e300));

  const double c = 40.0;
  const auto ctrl = example4_pi0(20.0, 1.1, 1.0);
  const auto bounded = transform_input_constraint([c](double) { return c; }, sys, ctrl, map);
  for (double t : {0.0, 0.5, 2.0, 5.0}) {
    for (double x : {0.05, 0.3, 0.9}) {
      const double mu_dot = std::exp(-t);
      const bool want = std::abs(ctrl.pi0(vec({x}), t) / mu_dot) <= c;
      CHECK(bounded.associated_holds(t, vec({x})) == want);
    }
  }
  CHECK(bounded.prescribed_holds(0.2, -39.0));
  CHECK_FALSE(bounded.prescribed_holds(0.2, 41.0));
}

TEST_CASE("attractivity surrogate") {
  const double tau = 1.0;
  const auto map = kappa_log({{{1.0, kE}}, tau}, 3);
  SystemSpec sys{1, example4_f(-0.5), unit_gain(), 0.0};
  const auto ctrl = example4_pi0(20.0, 1.1, 1.0);
  const auto assoc = associated_system(sys, ctrl, map);
  SimOptions opts;
  const auto traj = run_associated(assoc, vec({1.0}), opts);
  CHECK(attractivity_check(traj, map, 0.0, 0.01));
  CHECK(attractivity_check(traj, map, 0.0, std::numeric_limits<double>::infinity()));

  // Constant velocity state: the mapped velocity xi_2 / mu' diverges.
  Trajectory constant;
  const double t_end = map.kappa(0.999 * tau);
  for (int i = 0; i <= 100; ++i) {
    constant.times.push_back(t_end * i / 100.0);
    constant.states.push_back(vec({0.0, 1.0}));
  }
  CHECK_FALSE(attractivity_check(constant, map, 0.0, 0.01));

  Trajectory short_run;
  for (int i = 0; i < 20; ++i) {
    short_run.times.push_back(0.01 * i);
    short_run.states.push_back(vec({0.0}));
  }
  CHECK_THROWS_AS(attractivity_check(short_run, map, 0.0, 0.01), std::invalid_argument);
}

TEST_CASE("nominal controller factories") {
  CHECK(linear_pd({2.0, 3.0}).pi0(vec({1.0, -1.0}), 0.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(linear_pd({}), std::invalid_argument);
  CHECK_THROWS_AS(linear_pd({1.0}).pi0(vec({1.0, 2.0}), 0.0), std::invalid_argument);
  CHECK(zero_controller().pi0(vec({3.0}), 1.0) == 0.0);
  CHECK_THROWS_AS(example4_pi0(-1.0, 1.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(example4_pi0(1.0, 1.0, 1.0), std::invalid_argument);
  const auto e4 = example4_pi0(20.0, 1.1, 1.0);
  CHECK(e4.guard(vec({1.1}), 0.0));
  CHECK_FALSE(e4.guard(vec({0.5}), 0.0));
  CHECK(std::isfinite(e4.pi0(vec({1.1}), 0.0)));
}
