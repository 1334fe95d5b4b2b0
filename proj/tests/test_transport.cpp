#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pinsker/transport.hpp"

using namespace pinsker;

namespace {

Word bin(const std::string& s) { return parse_word(s, Alphabet::binary()); }

BlockDist dist(const Alphabet& a, std::size_t l,
               const std::vector<std::pair<std::string, std::uint64_t>>& atoms) {
  return BlockDist::from_words(a, l, atoms);
}

BlockDist point(const std::string& w) { return dist(Alphabet::binary(), w.size(), {{w, 1}}); }

BlockDist random_dist(std::mt19937_64& rng, const Alphabet& a, std::size_t l, std::size_t atoms,
                      std::uint64_t max_count = 20) {
  std::uniform_int_distribution<std::uint64_t> count(1, max_count);
  std::uniform_int_distribution<std::size_t> pick(0, a.size() - 1);
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  for (std::size_t k = 0; k < atoms; ++k) {
    std::string w(l, '0');
    for (auto& c : w) c = a.symbol(static_cast<Symbol>(pick(rng)));
    entries.emplace_back(w, count(rng));
  }
  return dist(a, l, entries);
}

// Independent min-cost flow: successive shortest paths with Bellman-Ford on
// an explicit residual edge list. Masses over total_mu * total_nu; returns
// the optimal cost numerator over (total_mu * total_nu * l).
std::int64_t oracle_cost(const BlockDist& mu, const BlockDist& nu) {
  struct Edge {
    int to;
    std::int64_t cap, cost;
    int rev;
  };
  const int n = static_cast<int>(mu.support_size()), m = static_cast<int>(nu.support_size());
  const int src = n + m, dst = n + m + 1;
  std::vector<std::vector<Edge>> g(n + m + 2);
  auto add = [&](int u, int v, std::int64_t cap, std::int64_t cost) {
    g[u].push_back({v, cap, cost, static_cast<int>(g[v].size())});
    g[v].push_back({u, 0, -cost, static_cast<int>(g[u].size()) - 1});
  };
  const std::int64_t big = std::numeric_limits<std::int64_t>::max() / 4;
  for (int i = 0; i < n; ++i) add(src, i, static_cast<std::int64_t>(mu.atoms()[i].count * nu.total()), 0);
  for (int j = 0; j < m; ++j) add(n + j, dst, static_cast<std::int64_t>(nu.atoms()[j].count * mu.total()), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const std::string a = mu.atom_string(i), b = nu.atom_string(j);
      std::int64_t d = 0;
      for (std::size_t k = 0; k < a.size(); ++k) d += a[k] != b[k];
      add(i, n + j, big, d);
    }
  }
  std::int64_t total_cost = 0;
  for (;;) {
    std::vector<std::int64_t> dist(g.size(), big);
    std::vector<std::pair<int, int>> prev(g.size(), {-1, -1});
    dist[src] = 0;
    for (std::size_t round = 0; round < g.size(); ++round) {
      bool changed = false;
      for (int u = 0; u < static_cast<int>(g.size()); ++u) {
        if (dist[u] == big) continue;
        for (int e = 0; e < static_cast<int>(g[u].size()); ++e) {
          const Edge& ed = g[u][e];
          if (ed.cap > 0 && dist[u] + ed.cost < dist[ed.to]) {
            dist[ed.to] = dist[u] + ed.cost;
            prev[ed.to] = {u, e};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[dst] == big) break;
    std::int64_t push = big;
    for (int v = dst; v != src; v = prev[v].first) push = std::min(push, g[prev[v].first][prev[v].second].cap);
    for (int v = dst; v != src; v = prev[v].first) {
      Edge& ed = g[prev[v].first][prev[v].second];
      ed.cap -= push;
      g[v][ed.rev].cap += push;
    }
    total_cost += push * dist[dst];
  }
  return total_cost;
}

void expect_valid(const TransportResult& r) {
  EXPECT_TRUE(r.coupling.marginals_exact());
  EXPECT_NEAR(coupling_cost(r.coupling), r.value, 1e-12);
  EXPECT_GE(r.value, 0.0);
  EXPECT_LE(r.value, 1.0);
}

}  // namespace

TEST(Hamming, Examples) {
  EXPECT_DOUBLE_EQ(hamming(bin("011"), bin("010")), 1.0 / 3.0);
  EXPECT_EQ(hamming(bin("0110"), bin("0110")), 0.0);
  EXPECT_EQ(hamming(bin("000"), bin("111")), 1.0);
  try {
    hamming(bin("01"), bin("011"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kLengthMismatch);
  }
}

TEST(DbarExact, Examples) {
  const BlockDist mu = dist(Alphabet::binary(), 2, {{"00", 1}, {"01", 2}, {"11", 3}});
  const TransportResult same = dbar_exact(mu, mu);
  EXPECT_EQ(same.value, 0.0);
  for (const auto& e : same.coupling.entries) EXPECT_EQ(e.left, e.right);
  expect_valid(same);

  EXPECT_EQ(dbar_exact(point("0110"), point("0011")).value, 0.5);

  const BlockDist half = dist(Alphabet::binary(), 1, {{"0", 1}, {"1", 1}});
  const BlockDist fifth = dist(Alphabet::binary(), 1, {{"0", 4}, {"1", 1}});
  const TransportResult r = dbar_exact(half, fifth);
  EXPECT_EQ(r.exact, (ExactValue{3, 10}));
  EXPECT_NEAR(r.value, 0.3, 1e-15);
  expect_valid(r);
}

TEST(DbarExact, Errors) {
  auto kind_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kInvalidInput;
  };
  EXPECT_EQ(kind_of([] { dbar_exact(point("01"), point("011")); }), ErrorKind::kLengthMismatch);
  EXPECT_EQ(kind_of([] {
              dbar_exact(dist(Alphabet::ornstein(), 2, {{"0e", 1}}), point("01"));
            }),
            ErrorKind::kLengthMismatch);
  std::mt19937_64 rng(1);
  const BlockDist big_a = random_dist(rng, Alphabet::binary(), 20, 1200);
  const BlockDist big_b = random_dist(rng, Alphabet::binary(), 20, 1200);
  ASSERT_GT(big_a.support_size() * big_b.support_size(), kMaxExactPairs);
  EXPECT_EQ(kind_of([&] { dbar_exact(big_a, big_b); }), ErrorKind::kTooLarge);
  EXPECT_NO_THROW(dbar_greedy(big_a, big_b));
}

TEST(DbarExact, MatchesTwoByTwoOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const Alphabet a = trial % 3 ? Alphabet::binary() : Alphabet::ornstein();
    const std::size_t l = 1 + trial % 5;
    const BlockDist mu = random_dist(rng, a, l, 1 + trial % 2, 1000);
    const BlockDist nu = random_dist(rng, a, l, 1 + (trial / 2) % 2, 1000);
    const TransportResult r = dbar_exact(mu, nu);
    EXPECT_EQ(r.exact, dbar_2x2_oracle_exact(mu, nu));
    EXPECT_NEAR(r.value, dbar_2x2_oracle(mu, nu), 1e-12);
  }
}

TEST(DbarExact, MatchesIndependentMinCostFlow) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const Alphabet a = trial % 2 ? Alphabet::binary() : Alphabet::ornstein();
    const std::size_t l = 1 + trial % 6;
    const BlockDist mu = random_dist(rng, a, l, 1 + trial % 8);
    const BlockDist nu = random_dist(rng, a, l, 1 + (trial * 7) % 9);
    const TransportResult r = dbar_exact(mu, nu);
    const std::int64_t num = oracle_cost(mu, nu);
    const ExactValue expected{static_cast<unsigned __int128>(num),
                              static_cast<unsigned __int128>(mu.total()) * nu.total() * l};
    EXPECT_EQ(r.exact, expected) << "trial " << trial;
    expect_valid(r);
  }
}

TEST(DbarExact, OrderingAgainstUpperBounds) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t l = 2 + trial % 6;
    const BlockDist mu = random_dist(rng, Alphabet::ornstein(), l, 10);
    const BlockDist nu = random_dist(rng, Alphabet::ornstein(), l, 10);
    const TransportResult exact = dbar_exact(mu, nu);
    const TransportResult greedy = dbar_greedy(mu, nu);
    const TransportResult product = dbar_product(mu, nu);
    expect_valid(greedy);
    expect_valid(product);
    EXPECT_LE(exact.value, greedy.value + 1e-12);
    EXPECT_LE(exact.value, product.value + 1e-12);
  }
}

TEST(DbarExact, MetricAxioms) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const Alphabet a = trial % 2 ? Alphabet::binary() : Alphabet::ornstein();
    const std::size_t l = 1 + trial % 6;
    const BlockDist x = random_dist(rng, a, l, 1 + trial % 20);
    const BlockDist y = random_dist(rng, a, l, 1 + (trial * 3) % 20);
    const BlockDist z = random_dist(rng, a, l, 1 + (trial * 7) % 20);
    const double xy = dbar_exact(x, y).value, yx = dbar_exact(y, x).value;
    const double yz = dbar_exact(y, z).value, xz = dbar_exact(x, z).value;
    EXPECT_EQ(dbar_exact(x, x).value, 0.0);
    EXPECT_EQ(dbar_exact(x, y).exact, dbar_exact(y, x).exact);
    EXPECT_NEAR(xy, yx, 1e-15);
    EXPECT_LE(xz, xy + yz + 1e-9);
  }
}

TEST(DbarExact, PointMassesGiveHamming) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 200; ++trial) {
    const BlockDist a = random_dist(rng, Alphabet::ornstein(), 1 + trial % 12, 1);
    const BlockDist b = random_dist(rng, Alphabet::ornstein(), a.block_len(), 1);
    const double h = hamming(a.word(0), b.word(0));
    EXPECT_EQ(dbar_exact(a, b).value, h);
    EXPECT_EQ(dbar_greedy(a, b).value, h);
    EXPECT_EQ(dbar_product(a, b).value, h);
  }
}

TEST(DbarExact, ProductMeasureContraction) {
  std::mt19937_64 rng(46);
  std::uniform_int_distribution<std::uint64_t> c(1, 9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<std::uint64_t> p{c(rng), c(rng), c(rng), c(rng)};
    const std::vector<std::uint64_t> q{c(rng), c(rng), c(rng), c(rng)};
    const double one = dbar_exact(product_block_dist(Alphabet::ornstein(), p, 1),
                                  product_block_dist(Alphabet::ornstein(), q, 1))
                           .value;
    for (std::size_t l = 2; l <= 4; ++l) {
      const double many = dbar_exact(product_block_dist(Alphabet::ornstein(), p, l),
                                     product_block_dist(Alphabet::ornstein(), q, l))
                              .value;
      EXPECT_LE(many, one + 1e-9);
    }
  }
}

TEST(DbarGreedy, Examples) {
  const BlockDist mu = dist(Alphabet::binary(), 3, {{"000", 2}, {"011", 5}, {"111", 1}});
  EXPECT_EQ(dbar_greedy(mu, mu).value, 0.0);
  EXPECT_EQ(dbar_greedy(point("010"), point("111")).value, 2.0 / 3.0);
}

TEST(DbarProduct, Examples) {
  const BlockDist half = dist(Alphabet::binary(), 1, {{"0", 1}, {"1", 1}});
  EXPECT_EQ(dbar_product(half, half).value, 0.5);
  EXPECT_EQ(dbar_exact(half, half).value, 0.0);
}

TEST(TwoByTwoOracle, ClosedForms) {
  for (std::uint64_t p = 0; p <= 10; ++p) {
    for (std::uint64_t q = 0; q <= 10; ++q) {
      std::vector<std::pair<std::string, std::uint64_t>> a{{"0", 10 - p}, {"1", p}};
      std::vector<std::pair<std::string, std::uint64_t>> b{{"0", 10 - q}, {"1", q}};
      const BlockDist mu = dist(Alphabet::binary(), 1, a), nu = dist(Alphabet::binary(), 1, b);
      const std::uint64_t gap = p > q ? p - q : q - p;
      EXPECT_EQ(dbar_2x2_oracle_exact(mu, nu), (ExactValue{gap, 10}));
    }
  }
  const BlockDist two = dist(Alphabet::binary(), 2, {{"01", 1}, {"11", 3}});
  EXPECT_EQ(dbar_2x2_oracle(two, two), 0.0);
  // Point mass against two atoms: nu(b) d(a, b) + nu(b') d(a, b').
  EXPECT_NEAR(dbar_2x2_oracle(point("00"), two), 0.25 * 0.5 + 0.75 * 1.0, 1e-15);
  EXPECT_THROW(dbar_2x2_oracle(dist(Alphabet::binary(), 2, {{"00", 1}, {"01", 1}, {"11", 1}}), two),
               Error);
}

TEST(DbarBestEffort, ChoosesByGuard) {
  std::mt19937_64 rng(47);
  const BlockDist a = random_dist(rng, Alphabet::binary(), 8, 30);
  const BlockDist b = random_dist(rng, Alphabet::binary(), 8, 30);
  EXPECT_EQ(dbar_best_effort(a, b).method, TransportMethod::kExact);
  const BlockDist big_a = random_dist(rng, Alphabet::binary(), 24, 1100);
  const BlockDist big_b = random_dist(rng, Alphabet::binary(), 24, 1100);
  EXPECT_EQ(dbar_best_effort(big_a, big_b).method, TransportMethod::kGreedy);
}

TEST(DbarExact, DeterministicCoupling) {
  std::mt19937_64 rng(48);
  const BlockDist a = random_dist(rng, Alphabet::ornstein(), 4, 40);
  const BlockDist b = random_dist(rng, Alphabet::ornstein(), 4, 40);
  const TransportResult r1 = dbar_exact(a, b), r2 = dbar_exact(a, b);
  ASSERT_EQ(r1.coupling.entries.size(), r2.coupling.entries.size());
  for (std::size_t k = 0; k < r1.coupling.entries.size(); ++k) {
    EXPECT_EQ(r1.coupling.entries[k].left, r2.coupling.entries[k].left);
    EXPECT_EQ(r1.coupling.entries[k].right, r2.coupling.entries[k].right);
    EXPECT_EQ(r1.coupling.entries[k].mass, r2.coupling.entries[k].mass);
  }
}

TEST(DbarExact, LargerSupportAgreesWithOracle) {
  std::mt19937_64 rng(49);
  for (int trial = 0; trial < 5; ++trial) {
    const BlockDist a = random_dist(rng, Alphabet::binary(), 10, 60, 50);
    const BlockDist b = random_dist(rng, Alphabet::binary(), 10, 60, 50);
    const ExactValue expected{static_cast<unsigned __int128>(oracle_cost(a, b)),
                              static_cast<unsigned __int128>(a.total()) * b.total() * 10};
    EXPECT_EQ(dbar_exact(a, b).exact, expected);
  }
}
