#include "ptctk/time_maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ptctk {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Bisection on an increasing function until the bracket is narrower than
// `width`, followed by a few Newton steps kept inside the final bracket.
double invert_monotone(const std::function<double(double)>& residual,
                       const std::function<double(double)>& slope, double lo,
                       double hi, double width) {
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double d = slope(x);
    if (!(d > 0.0) || !std::isfinite(d)) break;
    const double next = x - residual(x) / d;
    if (!(next >= lo && next <= hi)) break;
    x = next;
  }
  return x;
}

void require_positive_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("map horizon tau must be positive and finite");
  }
}

}  // namespace

std::string to_string(MapSide side) {
  return side == MapSide::mu ? "mu" : "kappa";
}

TimeMapPair::TimeMapPair(std::string family, double tau, int max_order,
                         ScalarOracle mu, ScalarOracle kappa,
                         double domain_epsilon)
    : family_(std::move(family)),
      tau_(tau),
      max_order_(max_order),
      domain_epsilon_(domain_epsilon),
      mu_(std::move(mu)),
      kappa_(std::move(kappa)) {
  require_positive_tau(tau);
  if (max_order < 1 || max_order > kMaxBellOrder) {
    throw std::invalid_argument("map max_order must lie in [1, " +
                                std::to_string(kMaxBellOrder) + "]");
  }
  if (!(domain_epsilon > 0.0 && domain_epsilon < 1.0)) {
    throw std::invalid_argument("domain epsilon must lie in (0, 1)");
  }
  if (!mu_.value || !mu_.derivative || !kappa_.value || !kappa_.derivative) {
    throw std::invalid_argument("map oracles must all be set");
  }
}

TimeMapPair TimeMapPair::from_kappa(std::string family, double tau,
                                    int max_order, ScalarOracle kappa,
                                    double domain_epsilon) {
  require_positive_tau(tau);
  auto kv = kappa.value;
  auto kd = kappa.derivative;
  // Oracles are only trusted up to the kappa domain limit.
  const double top = tau * (1.0 - domain_epsilon);
  auto mu_value = [kv, kd, tau, top](double t) {
    if (t <= 0.0) return 0.0;
    if (kv(top) <= t) return top;
    return invert_monotone([&](double s) { return kv(s) - t; },
                           [&](double s) { return kd(1, s); }, 0.0, top,
                           1e-13 * tau);
  };
  auto mu_derivative = [kd, mu_value](int k, double t) {
    const double s = mu_value(t);
    std::vector<double> d(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) d[static_cast<std::size_t>(i - 1)] = kd(i, s);
    return little_r(k, DerivativeJet(std::move(d)));
  };
  return TimeMapPair(std::move(family), tau, max_order,
                     ScalarOracle{mu_value, mu_derivative}, std::move(kappa),
                     domain_epsilon);
}

TimeMapPair TimeMapPair::from_mu(std::string family, double tau, int max_order,
                                 ScalarOracle mu, double domain_epsilon) {
  require_positive_tau(tau);
  auto mv = mu.value;
  auto md = mu.derivative;
  auto kappa_value = [mv, md, tau](double s) {
    if (s <= 0.0) return 0.0;
    double hi = 1.0;
    while (mv(hi) < s) {
      hi *= 2.0;
      if (hi > 1e12) {
        throw DomainError("kappa: cannot bracket preimage of " + describe(s));
      }
    }
    return invert_monotone([&](double t) { return mv(t) - s; },
                           [&](double t) { return md(1, t); }, 0.0, hi,
                           1e-13 * std::max(1.0, hi));
  };
  auto kappa_derivative = [md, kappa_value](int k, double s) {
    const double t = kappa_value(s);
    std::vector<double> d(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) d[static_cast<std::size_t>(i - 1)] = md(i, t);
    return little_r(k, DerivativeJet(std::move(d)));
  };
  return TimeMapPair(std::move(family), tau, max_order, std::move(mu),
                     ScalarOracle{kappa_value, kappa_derivative},
                     domain_epsilon);
}

void TimeMapPair::check_mu_domain(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw DomainError("mu evaluated outside [0, inf) at t = " + describe(t));
  }
}

void TimeMapPair::check_kappa_domain(double s) const {
  if (!(s >= 0.0) || s > kappa_limit()) {
    throw DomainError("kappa evaluated outside [0, tau(1 - eps)] at s = " +
                      describe(s) + " (tau = " + describe(tau_) + ")");
  }
}

void TimeMapPair::check_order(int k) const {
  if (k < 1 || k > max_order_) {
    throw std::invalid_argument("derivative order " + std::to_string(k) +
                                " outside [1, " + std::to_string(max_order_) +
                                "]");
  }
}

double TimeMapPair::mu(double t) const {
  check_mu_domain(t);
  return mu_.value(t);
}

double TimeMapPair::kappa(double s) const {
  check_kappa_domain(s);
  return kappa_.value(s);
}

double TimeMapPair::mu_derivative(int k, double t) const {
  check_order(k);
  check_mu_domain(t);
  return mu_.derivative(k, t);
}

double TimeMapPair::kappa_derivative(int k, double s) const {
  check_order(k);
  check_kappa_domain(s);
  return kappa_.derivative(k, s);
}

DerivativeJet TimeMapPair::jet(MapSide side, double t, int order) const {
  if (order < 1 || order > max_order_) {
    throw std::invalid_argument("jet order " + std::to_string(order) +
                                " outside [1, " + std::to_string(max_order_) +
                                "]");
  }
  if (side == MapSide::mu) {
    check_mu_domain(t);
  } else {
    check_kappa_domain(t);
  }
  const auto& oracle = side == MapSide::mu ? mu_ : kappa_;
  std::vector<double> d(static_cast<std::size_t>(order));
  for (int k = 1; k <= order; ++k) {
    const double v = oracle.derivative(k, t);
    if (!std::isfinite(v)) {
      throw DomainError(to_string(side) + " derivative " + std::to_string(k) +
                        " is not finite at t = " + describe(t));
    }
    d[static_cast<std::size_t>(k - 1)] = v;
  }
  return DerivativeJet(std::move(d));
}

TimeMapPair kappa_log(const MapFamilyParams& params, int max_order) {
  require_positive_tau(params.tau);
  if (params.terms.empty()) {
    throw std::invalid_argument("log_kappa: at least one (a, b) term required");
  }
  // -sum a_i log_{b_i}(1 - t/tau) = -C ln(1 - t/tau), C = sum a_i / ln b_i.
  double c = 0.0;
  for (const auto& [a, b] : params.terms) {
    if (!(a > 0.0) || !(b > 1.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw std::invalid_argument(
          "log_kappa: terms require a > 0 and b > 1, got (" + describe(a) +
          ", " + describe(b) + ")");
    }
    c += a / std::log(b);
  }
  const double tau = params.tau;
  ScalarOracle kappa{
      [c, tau](double t) { return -c * std::log1p(-t / tau); },
      [c, tau](int k, double t) {
        return c * factorial(k - 1) / std::pow(tau - t, k);
      }};
  ScalarOracle mu{
      [c, tau](double t) { return -tau * std::expm1(-t / c); },
      [c, tau](int k, double t) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        return sign * tau * std::pow(c, -k) * std::exp(-t / c);
      }};
  return TimeMapPair("log_kappa", tau, max_order, std::move(mu),
                     std::move(kappa));
}

TimeMapPair mu_exp(const MapFamilyParams& params, int max_order) {
  require_positive_tau(params.tau);
  if (params.terms.empty()) {
    throw std::invalid_argument("exp_mu: at least one (a, b) term required");
  }
  std::vector<double> rates;
  for (const auto& [a, b] : params.terms) {
    if (!(a > 1.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw std::invalid_argument(
          "exp_mu: terms require a > 1 and b > 0, got (" + describe(a) + ", " +
          describe(b) + ")");
    }
    rates.push_back(b * std::log(a));
  }
  const double tau = params.tau;
  const double weight = tau / static_cast<double>(rates.size());

  ScalarOracle mu{
      [rates, weight](double t) {
        double sum = 0.0;
        for (double lam : rates) sum += -std::expm1(-lam * t);
        return weight * sum;
      },
      [rates, weight](int k, double t) {
        const double sign = (k % 2 == 1) ? 1.0 : -1.0;
        double sum = 0.0;
        for (double lam : rates) sum += std::pow(lam, k) * std::exp(-lam * t);
        return sign * weight * sum;
      }};

  if (rates.size() == 1) {
    const double lam = rates.front();
    ScalarOracle kappa{
        [lam, tau](double s) { return -std::log1p(-s / tau) / lam; },
        [lam, tau](int k, double s) {
          return factorial(k - 1) / (lam * std::pow(tau - s, k));
        }};
    return TimeMapPair("exp_mu", tau, max_order, std::move(mu),
                       std::move(kappa));
  }

  // Solve log(mean_i exp(-lam_i t)) = log(1 - s/tau); the complement form
  // keeps full relative precision as s approaches tau.
  const auto [lam_min, lam_max] = std::minmax_element(rates.begin(), rates.end());
  const double lo_rate = *lam_min;
  const double hi_rate = *lam_max;
  auto kappa_value = [rates, tau, lo_rate, hi_rate](double s) {
    if (s <= 0.0) return 0.0;
    const double target = std::log1p(-s / tau);  // < 0
    auto log_mean = [&](double t) {
      double m = -std::numeric_limits<double>::infinity();
      for (double lam : rates) m = std::max(m, -lam * t);
      double acc = 0.0;
      for (double lam : rates) acc += std::exp(-lam * t - m);
      return m + std::log(acc / static_cast<double>(rates.size()));
    };
    auto slope = [&](double t) {  // -d/dt log_mean, positive
      double m = -std::numeric_limits<double>::infinity();
      for (double lam : rates) m = std::max(m, -lam * t);
      double num = 0.0;
      double den = 0.0;
      for (double lam : rates) {
        const double w = std::exp(-lam * t - m);
        num += lam * w;
        den += w;
      }
      return num / den;
    };
    const double lo = -target / hi_rate;
    const double hi = -target / lo_rate;
    return invert_monotone([&](double t) { return target - log_mean(t); },
                           slope, lo, hi, 1e-13 * std::max(tau, hi));
  };
  auto mu_d = mu.derivative;
  auto kappa_derivative = [mu_d, kappa_value](int k, double s) {
    const double t = kappa_value(s);
    std::vector<double> d(static_cast<std::size_t>(k));
    for (int i = 1; i <= k; ++i) d[static_cast<std::size_t>(i - 1)] = mu_d(i, t);
    return little_r(k, DerivativeJet(std::move(d)));
  };
  return TimeMapPair("exp_mu", tau, max_order, std::move(mu),
                     ScalarOracle{kappa_value, kappa_derivative});
}

TimeMapPair make_map_family(const std::string& name,
                            const MapFamilyParams& params, int max_order) {
  if (name == "log_kappa") return kappa_log(params, max_order);
  if (name == "exp_mu") return mu_exp(params, max_order);
  throw std::invalid_argument("unknown map family '" + name + "'");
}

ShiftedMapPair::ShiftedMapPair(std::shared_ptr<const TimeMapPair> base,
                               double t0)
    : base_(std::move(base)), t0_(t0) {
  if (!base_) throw std::invalid_argument("shifted: null base map");
  if (!(t0 >= 0.0) || !std::isfinite(t0)) {
    throw std::invalid_argument("shifted: t0 must be finite and >= 0");
  }
}

double ShiftedMapPair::mu(double t) const {
  if (t < t0_) {
    throw DomainError("shifted mu evaluated before t0 at t = " + describe(t));
  }
  return base_->mu(t - t0_) + t0_;
}

double ShiftedMapPair::kappa(double s) const {
  if (s < t0_) {
    throw DomainError("shifted kappa evaluated before t0 at s = " + describe(s));
  }
  return base_->kappa(s - t0_) + t0_;
}

DerivativeJet ShiftedMapPair::jet(MapSide side, double t, int order) const {
  if (t < t0_) {
    throw DomainError("shifted jet evaluated before t0 at t = " + describe(t));
  }
  return base_->jet(side, t - t0_, order);
}

ShiftedMapPair shifted(const TimeMapPair& map, double t0) {
  return ShiftedMapPair(std::make_shared<const TimeMapPair>(map), t0);
}

std::vector<double> uniform_grid(const TimeMapPair& map, std::size_t n,
                                 double fraction) {
  std::vector<double> grid;
  if (n == 0) return grid;
  const double top = std::min(fraction * map.tau(), map.kappa_limit());
  grid.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid.push_back(n == 1 ? 0.0
                          : top * static_cast<double>(i) /
                                static_cast<double>(n - 1));
  }
  return grid;
}

ValidationReport validate_class(const TimeMapPair& map,
                                const std::vector<double>& grid) {
  ValidationReport report;
  auto fail = [&](std::string check, double t, double value) {
    report.failures.push_back({std::move(check), t, value});
  };
  const bool second = map.max_order() >= 2;

  if (const double k0 = map.kappa(0.0); std::abs(k0) > 1e-12) {
    fail("kappa(0) == 0", 0.0, k0);
  }
  if (const double m0 = map.mu(0.0); std::abs(m0) > 1e-12) {
    fail("mu(0) == 0", 0.0, m0);
  }

  double prev_kdot = -std::numeric_limits<double>::infinity();
  double prev_mdot = std::numeric_limits<double>::infinity();
  double first_kdot = 0.0;
  double last_kdot = 0.0;
  double first_mdot = 0.0;
  double last_mdot = 0.0;
  bool first = true;
  for (double s : grid) {
    ++report.points_checked;
    try {
      const double kdot = map.kappa_derivative(1, s);
      if (!(kdot > 0.0)) fail("kappa' > 0", s, kdot);
      if (second) {
        const double kddot = map.kappa_derivative(2, s);
        if (kddot < 0.0) fail("kappa'' >= 0", s, kddot);
      }
      if (kdot < prev_kdot) fail("kappa' non-decreasing", s, kdot);
      prev_kdot = kdot;

      const double t = map.kappa(s);
      const double mdot = map.mu_derivative(1, t);
      if (!(mdot > 0.0)) fail("mu' > 0", t, mdot);
      if (second) {
        const double mddot = map.mu_derivative(2, t);
        if (mddot > 0.0) fail("mu'' <= 0", t, mddot);
      }
      if (mdot > prev_mdot) fail("mu' non-increasing", t, mdot);
      prev_mdot = mdot;

      const double mu_back = map.mu(t);
      if (std::abs(mu_back - s) > 1e-9) fail("mu(kappa(s)) == s", s, mu_back - s);
      // kappa(mu(t)) inherits the rounding of mu amplified by kappa'.
      const double tol = 1e-9 + 8.0 * std::numeric_limits<double>::epsilon() *
                                    map.tau() * kdot;
      if (mu_back <= map.kappa_limit()) {
        const double t_back = map.kappa(mu_back);
        if (std::abs(t_back - t) > tol) {
          fail("kappa(mu(t)) == t", t, t_back - t);
        }
      }

      if (first) {
        first_kdot = kdot;
        first_mdot = mdot;
        first = false;
      }
      last_kdot = kdot;
      last_mdot = mdot;
    } catch (const std::exception& e) {
      fail(std::string("evaluation: ") + e.what(), s, 0.0);
    }
  }
  if (grid.size() >= 2 && !first) {
    if (!(last_kdot > first_kdot)) {
      fail("kappa' grows toward horizon", grid.back(), last_kdot);
    }
    if (!(last_mdot < first_mdot)) {
      fail("mu' decays", map.kappa(grid.back()), last_mdot);
    }
  }
  return report;
}

}  // namespace ptctk
