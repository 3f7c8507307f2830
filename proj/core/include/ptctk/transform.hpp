#pragma once

// State-space time-scale transforms. For a map s with inverse-derivative
// functionals r_k[s], the lower-triangular matrix
//   B_n[s]_{ij} = B_{i-1,j-1}(r_1[s], ..., r_{i-j+1}[s]),  j <= i,
// carries a state between the two time scales, and b_n[s] (the first n
// entries of the last row of B_{n+1}[s]) collects the extra terms that appear
// in the highest derivative.

#include <span>

#include "ptctk/bell.hpp"
#include "ptctk/time_maps.hpp"
#include "ptctk/types.hpp"

namespace ptctk {

struct BellTransform {
  int n = 0;
  Matrix B;          // n x n, lower triangular
  Vector b;          // n
  double at_time = 0.0;
};

/// Jet order needed by bell_matrix(n, .) and bell_vector(n, .) respectively.
inline int bell_matrix_jet_order(int n) { return n > 1 ? n - 1 : 1; }
inline int bell_vector_jet_order(int n) { return n; }

Matrix bell_matrix(int n, const DerivativeJet& jet);
Vector bell_vector(int n, const DerivativeJet& jet);

/// Both functionals from one jet of order >= n (one Bell table evaluation).
BellTransform bell_transform(int n, const DerivativeJet& jet, double at_time);

/// B_n[side(t - t0)] x.
Vector map_state(const Vector& x, const TimeMapPair& map, MapSide side,
                 double t, double t0);

/// Transform of the requested side evaluated at the shifted argument t - t0.
BellTransform transform_at(int n, const TimeMapPair& map, MapSide side,
                           double t, double t0);

/// || B_n[kappa(mu(dt))] B_n[mu(dt)] - I ||_2 at dt = t - t0.
double roundtrip_check(int n, const TimeMapPair& map, double t, double t0);

/// | mu'(dt)^n b_n[mu(dt)]^T xi + b_n[kappa(mu(dt))]^T chi | with
/// chi = B_n[mu(dt)] xi.
double feedforward_identity_check(int n, const TimeMapPair& map, const Vector& xi,
                           double t, double t0);

/// i-th derivative of s1(s2(t)) by Faa di Bruno:
///   sum_{j=1}^{i} s1^{(j)}(s2(t)) B_{i,j}(s2'(t), ..., s2^{(i-j+1)}(t)).
/// `outer` holds s1', s1'', ... at s2(t); `inner` holds s2', s2'', ... at t.
double compose_derivative(int i, std::span<const double> outer,
                          const DerivativeJet& inner);

}  // namespace ptctk
