#pragma once

// Time-scale maps: a class-M map mu compressing [0, inf) onto [0, tau) and its
// class-K inverse kappa stretching [0, tau) back onto [0, inf).

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ptctk/bell.hpp"

namespace ptctk {

enum class MapSide { mu, kappa };

std::string to_string(MapSide side);

/// Thrown when a map is evaluated outside its domain (kappa at or beyond the
/// guarded horizon, negative times, shifted maps before t0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A scalar function with a derivative oracle. `derivative(k, t)` must accept
/// every k in [1, max_order] of the owning map pair.
struct ScalarOracle {
  std::function<double(double)> value;
  std::function<double(int, double)> derivative;
};

/// Parameters of the two built-in families: terms (a_i, b_i) and horizon tau.
struct MapFamilyParams {
  std::vector<std::pair<double, double>> terms;
  double tau = 1.0;
};

/// kappa(t) domain standoff: evaluation requires t <= tau * (1 - eps).
inline constexpr double kDefaultDomainEpsilon = 1e-9;

/// Immutable (mu, kappa) pair on horizon tau. Safe to share across threads.
class TimeMapPair {
 public:
  /// Assemble from explicit oracles for both sides. The oracles must be
  /// mutually inverse; validate_class checks this on a grid.
  TimeMapPair(std::string family, double tau, int max_order, ScalarOracle mu,
              ScalarOracle kappa, double domain_epsilon = kDefaultDomainEpsilon);

  /// Build from a class-K oracle alone. mu is obtained by monotone bisection
  /// followed by Newton polish; mu derivatives come from the inverse-derivative
  /// functionals applied to kappa jets.
  static TimeMapPair from_kappa(std::string family, double tau, int max_order,
                                ScalarOracle kappa,
                                double domain_epsilon = kDefaultDomainEpsilon);

  /// Build from a class-M oracle alone; the mirror image of from_kappa.
  static TimeMapPair from_mu(std::string family, double tau, int max_order,
                             ScalarOracle mu,
                             double domain_epsilon = kDefaultDomainEpsilon);

  const std::string& family() const { return family_; }
  double tau() const { return tau_; }
  int max_order() const { return max_order_; }
  double domain_epsilon() const { return domain_epsilon_; }
  /// Largest admissible kappa argument, tau * (1 - eps).
  double kappa_limit() const { return tau_ * (1.0 - domain_epsilon_); }

  double mu(double t) const;
  double kappa(double s) const;
  double mu_derivative(int k, double t) const;
  double kappa_derivative(int k, double s) const;

  double value(MapSide side, double t) const {
    return side == MapSide::mu ? mu(t) : kappa(t);
  }
  double derivative(MapSide side, int k, double t) const {
    return side == MapSide::mu ? mu_derivative(k, t) : kappa_derivative(k, t);
  }

  /// (s', ..., s^(order)) of the requested side at t.
  DerivativeJet jet(MapSide side, double t, int order) const;

 private:
  void check_mu_domain(double t) const;
  void check_kappa_domain(double s) const;
  void check_order(int k) const;

  std::string family_;
  double tau_;
  int max_order_;
  double domain_epsilon_;
  ScalarOracle mu_;
  ScalarOracle kappa_;
};

/// kappa(t) = -sum a_i log_{b_i}(1 - t/tau); requires a_i > 0, b_i > 1.
TimeMapPair kappa_log(const MapFamilyParams& params, int max_order);

/// mu(t) = (1/N) sum tau (1 - a_i^{-b_i t}); requires a_i > 1, b_i > 0.
TimeMapPair mu_exp(const MapFamilyParams& params, int max_order);

/// Construct a built-in family by its registry name ("log_kappa", "exp_mu").
TimeMapPair make_map_family(const std::string& name,
                            const MapFamilyParams& params, int max_order);

/// mu_tilde(t) = mu(t - t0) + t0 and kappa_tilde(s) = kappa(s - t0) + t0.
/// Derivatives of the shifted maps equal those of the base maps at the
/// shifted argument.
class ShiftedMapPair {
 public:
  ShiftedMapPair(std::shared_ptr<const TimeMapPair> base, double t0);

  double t0() const { return t0_; }
  const TimeMapPair& base() const { return *base_; }

  double mu(double t) const;      // t >= t0
  double kappa(double s) const;   // s in [t0, t0 + tau)
  DerivativeJet jet(MapSide side, double t, int order) const;

 private:
  std::shared_ptr<const TimeMapPair> base_;
  double t0_;
};

ShiftedMapPair shifted(const TimeMapPair& map, double t0);

struct ValidationFailure {
  std::string check;
  double t;
  double value;
};

struct ValidationReport {
  std::vector<ValidationFailure> failures;
  std::size_t points_checked = 0;
  bool ok() const { return failures.empty(); }
};

/// Class-membership checks on a grid of prescribed-scale times s in [0, tau):
/// kappa' > 0, kappa'' >= 0 and kappa' growing toward the horizon; at the
/// matching infinite-scale times t = kappa(s): mu' > 0, mu'' <= 0 and mu'
/// decaying; inverse consistency of kappa and mu. Failures carry the offending
/// grid location.
ValidationReport validate_class(const TimeMapPair& map,
                                const std::vector<double>& grid);

/// n evenly spaced points on [0, fraction * tau].
std::vector<double> uniform_grid(const TimeMapPair& map, std::size_t n,
                                 double fraction = 0.999);

}  // namespace ptctk
