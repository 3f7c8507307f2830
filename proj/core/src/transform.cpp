#include "ptctk/transform.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptctk {

namespace {

void check_n(int n) {
  if (n < 1 || n > kMaxBellOrder) {
    throw std::invalid_argument("transform order n=" + std::to_string(n) +
                                " outside [1, " +
                                std::to_string(kMaxBellOrder) + "]");
  }
}

double first_derivative(const DerivativeJet& jet) {
  if (jet.order() < 1) {
    throw std::invalid_argument("transform needs at least the first derivative");
  }
  const double sdot = jet.derivative(1);
  if (sdot == 0.0) {
    throw std::domain_error("transform: first derivative vanishes");
  }
  return sdot;
}

// Lower-triangular with diag(1, 1/s', 1/s'^2, ...). Checked on every build.
void check_structure(const Matrix& B, double sdot) {
  const double inv = 1.0 / sdot;
  double expected = 1.0;
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    const double d = B(i, i);
    if (std::abs(d - expected) > 1e-12 * std::abs(expected)) {
      throw std::logic_error("bell matrix diagonal deviates from (1/s')^(i-1)");
    }
    for (Eigen::Index j = i + 1; j < B.cols(); ++j) {
      if (B(i, j) != 0.0) {
        throw std::logic_error("bell matrix is not lower triangular");
      }
    }
    expected *= inv;
  }
}

Matrix fill_matrix(int n, const BellTable& table) {
  Matrix B = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) B(i, j) = table(i, j);
  }
  return B;
}

}  // namespace

Matrix bell_matrix(int n, const DerivativeJet& jet) {
  check_n(n);
  const double sdot = first_derivative(jet);
  const int needed = n - 1;
  std::vector<double> r = needed > 0 ? little_r_all(needed, jet)
                                     : std::vector<double>{};
  Matrix B = fill_matrix(n, BellTable(n - 1, r));
  check_structure(B, sdot);
  return B;
}

Vector bell_vector(int n, const DerivativeJet& jet) {
  check_n(n);
  first_derivative(jet);
  const std::vector<double> r = little_r_all(n, jet);
  const BellTable table(n, r);
  Vector b(n);
  for (int j = 0; j < n; ++j) b(j) = table(n, j);
  return b;
}

BellTransform bell_transform(int n, const DerivativeJet& jet, double at_time) {
  check_n(n);
  const double sdot = first_derivative(jet);
  const std::vector<double> r = little_r_all(n, jet);
  const BellTable table(n, r);
  BellTransform out;
  out.n = n;
  out.at_time = at_time;
  out.B = fill_matrix(n, table);
  check_structure(out.B, sdot);
  out.b.resize(n);
  for (int j = 0; j < n; ++j) out.b(j) = table(n, j);
  return out;
}

Vector map_state(const Vector& x, const TimeMapPair& map, MapSide side,
                 double t, double t0) {
  const int n = static_cast<int>(x.size());
  check_n(n);
  const auto jet = map.jet(side, t - t0, bell_matrix_jet_order(n));
  return bell_matrix(n, jet) * x;
}

BellTransform transform_at(int n, const TimeMapPair& map, MapSide side,
                           double t, double t0) {
  const double dt = t - t0;
  return bell_transform(n, map.jet(side, dt, bell_vector_jet_order(n)), t);
}

double roundtrip_check(int n, const TimeMapPair& map, double t, double t0) {
  check_n(n);
  const double dt = t - t0;
  const double s = map.mu(dt);
  const int order = bell_matrix_jet_order(n);
  const Matrix forward = bell_matrix(n, map.jet(MapSide::mu, dt, order));
  const Matrix back = bell_matrix(n, map.jet(MapSide::kappa, s, order));
  return (back * forward - Matrix::Identity(n, n)).norm();
}

double feedforward_identity_check(int n, const TimeMapPair& map, const Vector& xi,
                           double t, double t0) {
  check_n(n);
  if (xi.size() != n) {
    throw std::invalid_argument("identity check: state dimension mismatch");
  }
  const double dt = t - t0;
  const double s = map.mu(dt);
  const auto forward = transform_at(n, map, MapSide::mu, dt, 0.0);
  const auto back = transform_at(n, map, MapSide::kappa, s, 0.0);
  const Vector chi = forward.B * xi;
  const double mudot_n = std::pow(map.mu_derivative(1, dt), n);
  return std::abs(mudot_n * forward.b.dot(xi) + back.b.dot(chi));
}

double compose_derivative(int i, std::span<const double> outer,
                          const DerivativeJet& inner) {
  if (i < 1) throw std::invalid_argument("compose_derivative: i must be >= 1");
  if (static_cast<int>(outer.size()) < i || inner.order() < i) {
    throw std::invalid_argument(
        "compose_derivative: need i derivatives of both functions");
  }
  const BellTable table(i, inner.values());
  double sum = 0.0;
  for (int j = 1; j <= i; ++j) {
    sum += outer[static_cast<std::size_t>(j - 1)] * table(i, j);
  }
  return sum;
}

}  // namespace ptctk
