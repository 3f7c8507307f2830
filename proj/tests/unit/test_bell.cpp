#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "ptctk/bell.hpp"

using namespace ptctk;

TEST_CASE("partition_count on small block multisets") {
  CHECK(partition_count(3, std::vector<int>{1, 2}) == 3);
  CHECK(partition_count(4, std::vector<int>{2, 2}) == 3);
  for (int n = 1; n <= 9; ++n) {
    CHECK(partition_count(n, std::vector<int>{n}) == 1);
  }
  CHECK(partition_count(0, std::vector<int>{}) == 1);
}

TEST_CASE("partition_count matches enumeration for every block multiset up to 7") {
  // Generate integer partitions of n (non-increasing parts).
  std::vector<int> parts;
  std::function<void(int, int, int)> rec = [&](int n, int remaining, int max_part) {
    if (remaining == 0) {
      CHECK(static_cast<long long>(partition_count(n, parts)) ==
            oracle::count_partitions_with_sizes(n, parts));
      return;
    }
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
      parts.push_back(p);
      rec(n, remaining - p, p);
      parts.pop_back();
    }
  };
  for (int n = 1; n <= 7; ++n) rec(n, n, n);
}

TEST_CASE("partition_count rejects bad input and overflow") {
  CHECK_THROWS_AS(partition_count(4, std::vector<int>{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(partition_count(2, std::vector<int>{0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(partition_count(-1, std::vector<int>{}), std::invalid_argument);
  std::vector<int> pairs(40, 2);
  CHECK_THROWS_AS(partition_count(80, pairs), std::overflow_error);
}

TEST_CASE("partial_bell base cases and a hand-computed value") {
  const std::vector<double> args{2.0, 5.0, 7.0};
  CHECK(partial_bell(0, 0, args) == 1.0);
  CHECK(partial_bell(2, 0, args) == 0.0);
  CHECK(partial_bell(0, 2, args) == 0.0);
  // Partitions of {1,2,3} into a singleton and a pair: 3 of them.
  CHECK(partial_bell(3, 2, std::vector<double>{2.0, 5.0}) == doctest::Approx(30.0));
  CHECK(partial_bell(3, 3, std::vector<double>{2.0}) == doctest::Approx(8.0));
  CHECK(partial_bell(3, 1, args) == doctest::Approx(7.0));
}

TEST_CASE("partial_bell argument and range checks") {
  CHECK_THROWS_AS(partial_bell(4, 1, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(partial_bell(13, 1, std::vector<double>(13, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(partial_bell(6, 2, std::vector<double>(6, 1.0), 5), std::invalid_argument);
  CHECK_NOTHROW(partial_bell(5, 2, std::vector<double>(6, 1.0), 5));
  CHECK_THROWS_AS(partial_bell(-1, 0, std::vector<double>{}), std::invalid_argument);
  // m > n is zero, not an error.
  CHECK(partial_bell(2, 3, std::vector<double>{1.0}) == 0.0);
}

TEST_CASE("partial_bell agrees with set-partition enumeration") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(7);
    for (auto& v : x) v = dist(rng);
    for (int n = 0; n <= 7; ++n) {
      for (int m = 0; m <= n; ++m) {
        const double want = oracle::bell_by_enumeration(n, m, x);
        const double got = partial_bell(n, m, x);
        worst = std::max(worst, oracle::rel_err(got, want));
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("BellTable reproduces partial_bell entrywise") {
  const std::vector<double> x{0.3, -1.2, 2.5, 0.7, -0.4, 1.1};
  const BellTable table(6, x);
  for (int n = 0; n <= 6; ++n) {
    for (int m = 0; m <= 6; ++m) {
      CHECK(table(n, m) == doctest::Approx(partial_bell(n, m, x)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(table(7, 1), std::out_of_range);
}

TEST_CASE("DerivativeJet indexing and validation") {
  const DerivativeJet jet{1.0, 2.0, 3.0};
  CHECK(jet.order() == 3);
  CHECK(jet.derivative(1) == 1.0);
  CHECK(jet.derivative(3) == 3.0);
  CHECK_THROWS_AS(jet.derivative(0), std::out_of_range);
  CHECK_THROWS_AS(jet.derivative(4), std::out_of_range);
  CHECK_THROWS_AS(DerivativeJet({1.0, NAN}), std::invalid_argument);
}

TEST_CASE("big_r known values") {
  CHECK(big_r(0, 0, DerivativeJet{}) == 1.0);
  CHECK(big_r(3, 2, DerivativeJet{0.0, 1.0, 2.0}) == doctest::Approx(20.0));
  CHECK(big_r(4, 3, DerivativeJet{0.0, 1.0, 1.0}) == doctest::Approx(105.0));
  for (int k = 1; k <= 6; ++k) CHECK(big_r(k, 0, DerivativeJet{1.0, 2.0}) == 0.0);
  // Two blocks of size two out of four elements: three ways.
  CHECK(big_r(2, 2, DerivativeJet{0.0, 1.5}) == doctest::Approx(3.0 * 1.5 * 1.5));
}

TEST_CASE("big_r equals the Bell polynomial with the first argument zeroed") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> d(8);
    for (auto& v : d) v = dist(rng);
    std::vector<double> x = d;
    x[0] = 0.0;
    const DerivativeJet jet(d);
    for (int k = 0; k <= 4; ++k) {
      for (int m = 0; m <= k; ++m) {
        if (k + m > 8) continue;
        const double want = oracle::bell_by_enumeration(k + m, m, x);
        CHECK(oracle::rel_err(big_r(k, m, jet), want) <= 1e-12);
      }
    }
  }
}

TEST_CASE("big_r_terms coefficients count the partitions they stand for") {
  for (int k = 1; k <= 5; ++k) {
    for (int m = 1; m <= k; ++m) {
      for (const auto& term : big_r_terms(k, m)) {
        CHECK(static_cast<int>(term.parts.size()) == m);
        int total = 0;
        for (int p : term.parts) {
          CHECK(p >= 2);
          total += p;
        }
        CHECK(total == k + m);
        CHECK(static_cast<long long>(term.coefficient) ==
              oracle::count_partitions_with_sizes(k + m, term.parts));
      }
    }
  }
}

TEST_CASE("little_r closed forms") {
  CHECK(little_r(1, DerivativeJet{4.0}) == doctest::Approx(0.25));
  CHECK(little_r(2, DerivativeJet{2.0, 4.0}) == doctest::Approx(-0.5));
  // r_3 = -s'''/s'^4 + 3 s''^2 / s'^5.
  CHECK(little_r(3, DerivativeJet{1.0, 1.0, 0.0}) == doctest::Approx(3.0));
  CHECK(little_r(3, DerivativeJet{2.0, 1.0, 3.0}) ==
        doctest::Approx(-3.0 / 16.0 + 3.0 / 32.0));
  CHECK_THROWS_AS(little_r(2, DerivativeJet{0.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(little_r(3, DerivativeJet{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("little_r_all matches elementwise evaluation") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const DerivativeJet jet(oracle::random_jet(rng, 8));
    const auto all = little_r_all(8, jet);
    REQUIRE(all.size() == 8);
    for (int k = 1; k <= 8; ++k) {
      CHECK(all[k - 1] == doctest::Approx(little_r(k, jet)).epsilon(1e-13));
    }
  }
}

TEST_CASE("little_r gives the derivatives of the inverse of a polynomial") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> coeff(-0.3, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    // s1' = 2 + sum_{k=1..5} c_k y^k stays >= 0.5 on [-1, 1].
    std::vector<double> c(6);
    c[0] = 2.0;
    for (int k = 1; k <= 5; ++k) c[k] = coeff(rng);
    auto s1_derivative = [&](int order, double y) {
      // order >= 1: derivative of s1 = d^{order-1}/dy^{order-1} s1'.
      double acc = 0.0;
      for (int k = order - 1; k <= 5; ++k) {
        double falling = 1.0;
        for (int j = 0; j < order - 1; ++j) falling *= k - j;
        acc += c[k] * falling * std::pow(y, k - order + 1);
      }
      return acc;
    };
    auto s1 = [&](double y) {
      double acc = 0.0;
      for (int k = 0; k <= 5; ++k) acc += c[k] * std::pow(y, k + 1) / (k + 1);
      return acc;
    };
    auto s2 = [&](double t) {
      double lo = -1.0, hi = 1.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (s1(mid) < t ? lo : hi) = mid;
      }
      double y = 0.5 * (lo + hi);
      for (int it = 0; it < 3; ++it) y -= (s1(y) - t) / s1_derivative(1, y);
      return y;
    };
    std::uniform_real_distribution<double> where(s1(-0.4), s1(0.4));
    const double t = where(rng);
    const double y = s2(t);
    std::vector<double> d(4);
    for (int k = 1; k <= 4; ++k) d[k - 1] = s1_derivative(k, y);
    const DerivativeJet jet(d);
    for (int k = 1; k <= 4; ++k) {
      const double fd = oracle::fd_derivative(s2, t, k);
      CHECK(oracle::rel_err(little_r(k, jet), fd) <= 1e-5);
    }
  }
}
