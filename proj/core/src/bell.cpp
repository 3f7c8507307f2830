#include "ptctk/bell.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ptctk {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw std::overflow_error("partition count exceeds 64-bit range");
  }
  return out;
}

// Exact binomial; every intermediate is itself a binomial coefficient.
std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = checked_mul(result, static_cast<std::uint64_t>(n - k + i)) /
             static_cast<std::uint64_t>(i);
  }
  return result;
}

void check_order(int n, int m, int cap) {
  if (n < 0 || m < 0) {
    throw std::invalid_argument("Bell indices must be non-negative");
  }
  if (cap > kMaxBellOrder || n > cap || m > cap) {
    throw std::invalid_argument("Bell order " + std::to_string(n) +
                                " exceeds supported cap " +
                                std::to_string(std::min(cap, kMaxBellOrder)));
  }
}

// Multisets of integers >= min_part with exactly `parts` elements summing to
// `total`, emitted in non-increasing order.
void enumerate_multisets(int total, int parts, int max_part, int min_part,
                         std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (parts == 0) {
    if (total == 0) out.push_back(current);
    return;
  }
  const int hi = std::min(max_part, total - (parts - 1) * min_part);
  for (int p = hi; p >= min_part; --p) {
    current.push_back(p);
    enumerate_multisets(total - p, parts - 1, p, min_part, current, out);
    current.pop_back();
  }
}

// R-term tables for 0 <= m <= k <= 2 * cap; indexed [k][m].
using RTable = std::vector<std::vector<std::vector<RTerm>>>;

RTable build_r_table() {
  const int k_max = kMaxBellOrder;
  RTable table(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    table[k].resize(k + 1);
    for (int m = 0; m <= k; ++m) {
      if (m == 0) {
        if (k == 0) table[k][m].push_back(RTerm{1, {}});
        continue;
      }
      std::vector<std::vector<int>> multisets;
      std::vector<int> current;
      enumerate_multisets(k + m, m, k + m, 2, current, multisets);
      for (auto& parts : multisets) {
        const auto count = partition_count(k + m, parts);
        table[k][m].push_back(RTerm{count, std::move(parts)});
      }
    }
  }
  return table;
}

const RTable& r_table() {
  static const RTable table = build_r_table();
  return table;
}

}  // namespace

DerivativeJet::DerivativeJet(std::vector<double> derivatives)
    : d_(std::move(derivatives)) {
  for (double v : d_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("derivative jet entries must be finite");
    }
  }
}

DerivativeJet::DerivativeJet(std::initializer_list<double> derivatives)
    : DerivativeJet(std::vector<double>(derivatives)) {}

double DerivativeJet::derivative(int k) const {
  if (k < 1 || k > order()) {
    throw std::out_of_range("jet of order " + std::to_string(order()) +
                            " has no derivative of order " + std::to_string(k));
  }
  return d_[static_cast<std::size_t>(k - 1)];
}

std::uint64_t partition_count(int n, std::span<const int> blocks) {
  if (n < 0) throw std::invalid_argument("partition_count: n must be >= 0");
  int sum = 0;
  std::map<int, int> multiplicity;
  for (int c : blocks) {
    if (c < 1) {
      throw std::invalid_argument("partition_count: block sizes must be >= 1");
    }
    sum += c;
    ++multiplicity[c];
  }
  if (sum != n) {
    throw std::invalid_argument("partition_count: blocks sum to " +
                                std::to_string(sum) + ", expected " +
                                std::to_string(n));
  }
  // Place the blocks of each distinct size in turn: choose which elements the
  // size-c group covers, then split them into m blocks of size c by always
  // pairing the smallest free element with c-1 others.
  std::uint64_t count = 1;
  int remaining = n;
  for (const auto& [c, m] : multiplicity) {
    count = checked_mul(count, binomial(remaining, c * m));
    for (int j = 1; j <= m; ++j) {
      count = checked_mul(count, binomial(j * c - 1, c - 1));
    }
    remaining -= c * m;
  }
  return count;
}

BellTable::BellTable(int n_max, std::span<const double> args, int order_cap)
    : n_max_(n_max) {
  check_order(n_max, 0, order_cap);
  if (n_max >= 1 && static_cast<int>(args.size()) < n_max) {
    throw std::invalid_argument("BellTable: need " + std::to_string(n_max) +
                                " arguments, got " +
                                std::to_string(args.size()));
  }
  const auto stride = static_cast<std::size_t>(n_max + 1);
  table_.assign(stride * stride, 0.0);
  auto at = [&](int n, int m) -> double& {
    return table_[static_cast<std::size_t>(n) * stride +
                  static_cast<std::size_t>(m)];
  };
  at(0, 0) = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    for (int m = 1; m <= n; ++m) {
      double sum = 0.0;
      for (int i = 1; i <= n - m + 1; ++i) {
        sum += static_cast<double>(binomial(n - 1, i - 1)) *
               args[static_cast<std::size_t>(i - 1)] * at(n - i, m - 1);
      }
      at(n, m) = sum;
    }
  }
}

double BellTable::operator()(int n, int m) const {
  if (n < 0 || m < 0 || n > n_max_ || m > n_max_) {
    throw std::out_of_range("BellTable index outside evaluated range");
  }
  if (m > n) return 0.0;
  return table_[static_cast<std::size_t>(n) *
                    static_cast<std::size_t>(n_max_ + 1) +
                static_cast<std::size_t>(m)];
}

double partial_bell(int n, int m, std::span<const double> args, int order_cap) {
  check_order(n, m, order_cap);
  if (m > n) return 0.0;
  if (m == 0) return n == 0 ? 1.0 : 0.0;
  const int needed = n - m + 1;
  if (static_cast<int>(args.size()) < needed) {
    throw std::invalid_argument("partial_bell: B_{" + std::to_string(n) + "," +
                                std::to_string(m) + "} needs " +
                                std::to_string(needed) + " arguments, got " +
                                std::to_string(args.size()));
  }
  // Only s_1..s_{n-m+1} can appear; pad the rest so the table is well formed.
  std::vector<double> padded(static_cast<std::size_t>(n), 0.0);
  std::copy_n(args.begin(), needed, padded.begin());
  return BellTable(n, padded, order_cap)(n, m);
}

const std::vector<RTerm>& big_r_terms(int k, int m) {
  if (k < 0 || m < 0 || k > kMaxBellOrder) {
    throw std::invalid_argument("big_r: index outside supported range");
  }
  static const std::vector<RTerm> empty;
  if (m > k) return empty;
  return r_table()[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)];
}

double big_r(int k, int m, const DerivativeJet& jet) {
  const auto& terms = big_r_terms(k, m);
  if (m >= 1 && m <= k && jet.order() < k - m + 2) {
    throw std::invalid_argument("big_r: R_{" + std::to_string(k) + "," +
                                std::to_string(m) + "} needs derivatives up to " +
                                std::to_string(k - m + 2) + ", jet has " +
                                std::to_string(jet.order()));
  }
  double sum = 0.0;
  for (const auto& term : terms) {
    double product = static_cast<double>(term.coefficient);
    for (int part : term.parts) product *= jet.derivative(part);
    sum += product;
  }
  return sum;
}

std::vector<double> little_r_all(int count, const DerivativeJet& jet) {
  if (count < 0 || count > kMaxBellOrder) {
    throw std::invalid_argument("little_r: order outside supported range");
  }
  if (count == 0) return {};
  if (jet.order() < count) {
    throw std::invalid_argument("little_r: r_" + std::to_string(count) +
                                " needs a jet of order " + std::to_string(count) +
                                ", got " + std::to_string(jet.order()));
  }
  const double sdot = jet.derivative(1);
  if (sdot == 0.0) {
    throw std::domain_error("little_r: first derivative vanishes, map is not "
                            "strictly monotone here");
  }
  const double inv = 1.0 / sdot;
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) {
    // r_k = s'^{-k} * sum_m (-1)^m s'^{-m} R_{k-1,m}
    double sum = 0.0;
    double scale = 1.0;
    for (int m = 0; m <= k - 1; ++m) {
      const double term = big_r(k - 1, m, jet) * scale;
      sum += (m % 2 == 0) ? term : -term;
      scale *= inv;
    }
    out[static_cast<std::size_t>(k - 1)] = sum * std::pow(inv, k);
  }
  return out;
}

double little_r(int k, const DerivativeJet& jet) {
  if (k < 1) throw std::invalid_argument("little_r: k must be >= 1");
  return little_r_all(k, jet).back();
}

}  // namespace ptctk
