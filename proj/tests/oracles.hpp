#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

/// Calls visit(blocks) once per set partition of {0..n-1}; blocks[i] is the
/// block index of element i (restricted growth string).
inline void for_each_set_partition(
    int n, const std::function<void(const std::vector<int>&, int)>& visit) {
  std::vector<int> a(n, 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == n) {
      visit(a, used);
      return;
    }
    for (int b = 0; b <= used && b < n; ++b) {
      a[i] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  if (n == 0) {
    visit(a, 0);
    return;
  }
  rec(0, 0);
}

/// Block sizes of a restricted growth string with `count` blocks.
inline std::vector<int> block_sizes(const std::vector<int>& rgs, int count) {
  std::vector<int> sizes(count, 0);
  for (int b : rgs) ++sizes[b];
  return sizes;
}

/// B_{n,m}(x_1, ...) straight from the definition: sum over set partitions of
/// {1..n} into m blocks of prod x_{|block|}. x[k-1] holds x_k.
inline double bell_by_enumeration(int n, int m, const std::vector<double>& x) {
  double total = 0.0;
  for_each_set_partition(n, [&](const std::vector<int>& rgs, int used) {
    if (used != m) return;
    double prod = 1.0;
    for (int size : block_sizes(rgs, used)) prod *= x[size - 1];
    total += prod;
  });
  return total;
}

/// Number of set partitions of {1..n} whose sorted block sizes equal `sizes`.
inline long long count_partitions_with_sizes(int n, std::vector<int> sizes) {
  std::sort(sizes.begin(), sizes.end());
  long long count = 0;
  for_each_set_partition(n, [&](const std::vector<int>& rgs, int used) {
    auto s = block_sizes(rgs, used);
    std::sort(s.begin(), s.end());
    if (s == sizes) ++count;
  });
  return count;
}

/// k-th derivative by central differences with one Richardson step.
/// Steps grow with k so that roundoff (eps / h^k) stays below truncation.
inline double fd_derivative(const std::function<double(double)>& f, double x,
                            int k, double h = 0.0) {
  if (h == 0.0) {
    static const double steps[] = {0.0, 1e-3, 2e-3, 1e-2, 2e-2, 4e-2, 6e-2};
    h = steps[std::min(k, 6)];
  }
  // Central stencil for the k-th derivative: sum_j (-1)^j C(k, j) f(x + (k/2 - j) h) / h^k.
  auto stencil = [&](double step) {
    double acc = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k; ++j) {
      acc += ((j % 2) ? -1.0 : 1.0) * binom * f(x + (0.5 * k - j) * step);
      binom = binom * (k - j) / (j + 1);
    }
    return acc / std::pow(step, k);
  };
  // Second-order stencil: combine h and h/2 to cancel the h^2 term.
  const double coarse = stencil(h);
  const double fine = stencil(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

/// Relative error with a unit floor on the scale.
inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

/// Pure relative error (scale |want|, falling back to absolute at zero).
inline double strict_rel_err(double got, double want) {
  const double scale = std::abs(want);
  return scale > 0.0 ? std::abs(got - want) / scale : std::abs(got);
}

/// Random derivative jet s', ..., s^(order) with s' in [lo, hi] and the rest
/// in [-2, 2].
inline std::vector<double> random_jet(std::mt19937_64& rng, int order,
                                      double lo = 0.1, double hi = 10.0) {
  std::uniform_real_distribution<double> first(lo, hi);
  std::uniform_real_distribution<double> rest(-2.0, 2.0);
  std::vector<double> d(order);
  d[0] = first(rng);
  for (int i = 1; i < order; ++i) d[i] = rest(rng);
  return d;
}

}  // namespace oracle
