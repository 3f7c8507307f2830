#pragma once

// Partial Bell polynomials and the inverse-derivative functionals built on them.
//
// Everything here is a pure function of its arguments. Coefficient tables are
// built once per process behind a function-local static and are read-only
// afterwards, so concurrent callers are safe.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace ptctk {

/// Largest polynomial order accepted by the Bell machinery.
inline constexpr int kMaxBellOrder = 12;

/// Derivatives (s', s'', ..., s^(order)) of a scalar function at one instant.
/// Indexing through derivative(k) is 1-based to match the derivative order.
class DerivativeJet {
 public:
  DerivativeJet() = default;
  explicit DerivativeJet(std::vector<double> derivatives);
  DerivativeJet(std::initializer_list<double> derivatives);

  int order() const { return static_cast<int>(d_.size()); }
  double derivative(int k) const;  // k in [1, order]
  std::span<const double> values() const { return d_; }

 private:
  std::vector<double> d_;
};

/// Number of set partitions of {1..n} whose block sizes are exactly `blocks`
/// (as a multiset). Exact 64-bit arithmetic; throws std::overflow_error if the
/// count does not fit and std::invalid_argument if the blocks do not sum to n.
std::uint64_t partition_count(int n, std::span<const int> blocks);

/// B_{n,m}(s_1, ..., s_{n-m+1}) via the standard recurrence, memoised over
/// (n, m) inside the call. `args[i]` holds s_{i+1}.
double partial_bell(int n, int m, std::span<const double> args,
                    int order_cap = kMaxBellOrder);

/// Lower-triangular table of B_{i,j}(args) for 0 <= j <= i <= n_max.
/// Evaluates the whole recurrence once; used when many entries share the
/// same argument vector (the bell matrix and vector).
class BellTable {
 public:
  BellTable(int n_max, std::span<const double> args,
            int order_cap = kMaxBellOrder);

  double operator()(int n, int m) const;
  int max_order() const { return n_max_; }

 private:
  int n_max_;
  std::vector<double> table_;
};

/// R_{k,m}(s'', ..., s^(k-m+2)): sum over set partitions of {1..k+m} into m
/// blocks of size >= 2, each contributing the product of s^(block size).
/// Equivalently B_{k+m,m}(0, s'', s''', ...).
double big_r(int k, int m, const DerivativeJet& jet);

/// r_k[s]: the k-th derivative of the inverse function of s, expressed through
/// the derivatives of s at the preimage point. Throws std::domain_error when
/// s' == 0.
double little_r(int k, const DerivativeJet& jet);

/// r_1 .. r_count in one pass (shares the 1/s' powers).
std::vector<double> little_r_all(int count, const DerivativeJet& jet);

/// One monomial of R_{k,m}: integer coefficient times prod s^(order)^power.
struct RTerm {
  std::uint64_t coefficient;
  std::vector<int> parts;  // block sizes, each >= 2, non-increasing
};

/// Symbolic expansion of R_{k,m} as a list of monomials.
const std::vector<RTerm>& big_r_terms(int k, int m);

}  // namespace ptctk
