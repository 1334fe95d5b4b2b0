// Normalized Hamming distance and the d-bar transportation distance between
// block distributions.
//
// Distributions carry integer counts, so with L = lcm(total_mu, total_nu) the
// supplies c_i L / total_mu and demands c_j L / total_nu are integers and the
// Hamming cost (number of mismatches) is an integer in [0, l]. The exact
// solver therefore runs on integers and its optimum is an exact rational
// cost / (l L).

#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pinsker/core.hpp"

namespace pinsker {

inline double hamming(const Word& a, const Word& b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorKind::kLengthMismatch,
                "hamming needs equal nonzero lengths, got " +
                    std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
  return static_cast<double>(diff) / static_cast<double>(a.size());
}

enum class TransportMethod { kExact, kGreedy, kProduct };

inline const char* to_string(TransportMethod m) {
  switch (m) {
    case TransportMethod::kExact: return "exact";
    case TransportMethod::kGreedy: return "greedy";
    case TransportMethod::kProduct: return "product";
  }
  return "unknown";
}

/// Nonnegative rational num / den in 128-bit integers.
struct ExactValue {
  unsigned __int128 num = 0;
  unsigned __int128 den = 1;

  double to_double() const {
    return static_cast<double>(static_cast<long double>(num) /
                               static_cast<long double>(den));
  }

  friend bool operator==(const ExactValue& a, const ExactValue& b) {
    return a.num * b.den == b.num * a.den;
  }
};

struct TransportResult {
  double value = 0.0;
  ExactValue exact;
  Coupling coupling;
  TransportMethod method = TransportMethod::kExact;
  std::uint64_t iterations = 0;
};

/// Expected normalized Hamming cost under a coupling, recomputed from its
/// entries.
inline double coupling_cost(const Coupling& c) {
  const unsigned bits = c.left_marginal.alphabet().bits_per_symbol();
  unsigned __int128 acc = 0;
  for (const auto& e : c.entries) {
    acc += static_cast<unsigned __int128>(e.mass) *
           block_mismatches(c.left_marginal.atoms()[e.left].code,
                            c.right_marginal.atoms()[e.right].code, bits);
  }
  return static_cast<double>(static_cast<long double>(acc) /
                             (static_cast<long double>(c.mass_total) *
                              static_cast<long double>(c.block_len())));
}

namespace detail {

inline void check_comparable(const BlockDist& mu, const BlockDist& nu) {
  if (mu.block_len() != nu.block_len()) {
    throw Error(ErrorKind::kLengthMismatch,
                "block lengths " + std::to_string(mu.block_len()) + " and " +
                    std::to_string(nu.block_len()));
  }
  if (!(mu.alphabet() == nu.alphabet())) {
    throw Error(ErrorKind::kLengthMismatch, "distributions use different alphabets");
  }
}

struct ScaledMasses {
  std::uint64_t total;  // common denominator L
  std::vector<std::int64_t> supply;
  std::vector<std::int64_t> demand;
};

inline ScaledMasses scale_to_common_total(const BlockDist& mu, const BlockDist& nu) {
  const std::uint64_t g = std::gcd(mu.total(), nu.total());
  const unsigned __int128 lcm =
      static_cast<unsigned __int128>(mu.total() / g) * nu.total();
  // Keep l * L and every partial cost sum inside a signed 64-bit range.
  const unsigned __int128 limit =
      (static_cast<unsigned __int128>(1) << 62) / (mu.block_len() + 1);
  if (lcm > limit) {
    throw Error(ErrorKind::kTooLarge, "common denominator of the two distributions too large");
  }
  ScaledMasses out;
  out.total = static_cast<std::uint64_t>(lcm);
  const std::uint64_t fa = out.total / mu.total();
  const std::uint64_t fb = out.total / nu.total();
  for (const auto& a : mu.atoms()) out.supply.push_back(static_cast<std::int64_t>(a.count * fa));
  for (const auto& b : nu.atoms()) out.demand.push_back(static_cast<std::int64_t>(b.count * fb));
  return out;
}

inline std::vector<std::int32_t> cost_matrix(const BlockDist& mu, const BlockDist& nu) {
  const unsigned bits = mu.alphabet().bits_per_symbol();
  const std::size_t n = mu.support_size(), m = nu.support_size();
  std::vector<std::int32_t> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cost[i * m + j] = static_cast<std::int32_t>(
          block_mismatches(mu.atoms()[i].code, nu.atoms()[j].code, bits));
    }
  }
  return cost;
}

}  // namespace detail

inline constexpr std::uint64_t kMaxExactPairs = 1'000'000;

/// Optimal coupling by the primal-dual method on the bipartite transportation
/// network: Dijkstra on reduced costs updates node potentials, then a
/// Dinic-style maximum flow saturates every zero-reduced-cost augmenting
/// path. Every remaining source keeps a direct edge to every remaining sink,
/// so the shortest augmenting cost is an integer in [0, l] and there are at
/// most l + 1 phases. Scans run in atom index order, so the returned coupling
/// is deterministic.
inline TransportResult dbar_exact(const BlockDist& mu, const BlockDist& nu) {
  detail::check_comparable(mu, nu);
  const std::size_t n = mu.support_size(), m = nu.support_size();
  if (static_cast<std::uint64_t>(n) * m > kMaxExactPairs) {
    throw Error(ErrorKind::kTooLarge,
                "support sizes " + std::to_string(n) + " x " + std::to_string(m) +
                    " exceed the exact-solver guard of 1e6 pairs");
  }
  auto masses = detail::scale_to_common_total(mu, nu);
  const auto cost = detail::cost_matrix(mu, nu);

  using Cost = std::int64_t;
  constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;
  std::vector<std::int64_t> flow(n * m, 0);
  std::vector<std::int64_t>& supply = masses.supply;
  std::vector<std::int64_t>& demand = masses.demand;
  // Nodes 0..n-1 are left atoms, n..n+m-1 right atoms.
  const std::size_t nodes = n + m;
  std::vector<Cost> potential(nodes, 0);
  std::vector<Cost> dist(nodes);
  std::vector<char> done(nodes);
  std::vector<std::int64_t> level(nodes);
  std::vector<std::size_t> arc(nodes);
  std::vector<std::size_t> queue, path;
  queue.reserve(nodes);

  auto tight = [&](std::size_t i, std::size_t j) {
    return cost[i * m + j] + potential[i] - potential[n + j] == 0;
  };

  std::int64_t remaining = static_cast<std::int64_t>(masses.total);
  std::uint64_t phases = 0;
  while (remaining > 0) {
    ++phases;
    // Dijkstra from every source with supply left, stopping at the first
    // sink with demand left.
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (supply[i] > 0) dist[i] = 0;
    }
    Cost reach = kInf;
    for (;;) {
      std::size_t u = nodes;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < kInf && (u == nodes || dist[v] < dist[u])) u = v;
      }
      if (u == nodes) break;
      done[u] = 1;
      if (u >= n && demand[u - n] > 0) {
        reach = dist[u];
        break;
      }
      if (u < n) {
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t v = n + j;
          if (done[v]) continue;
          const Cost nd = dist[u] + cost[u * m + j] + potential[u] - potential[v];
          if (nd < dist[v]) dist[v] = nd;
        }
      } else {
        const std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (done[i] || flow[i * m + j] == 0) continue;
          const Cost nd = dist[u] - cost[i * m + j] + potential[u] - potential[i];
          if (nd < dist[i]) dist[i] = nd;
        }
      }
    }
    if (reach == kInf) {
      throw Error(ErrorKind::kInvalidInput, "transportation network disconnected");
    }
    for (std::size_t v = 0; v < nodes; ++v) potential[v] += std::min(dist[v], reach);

    // Maximum flow on the tight edges. Forward edges are uncapacitated,
    // backward edges carry the current flow.
    for (;;) {
      std::fill(level.begin(), level.end(), -1);
      queue.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (supply[i] > 0) {
          level[i] = 0;
          queue.push_back(i);
        }
      }
      bool sink_reached = false;
      for (std::size_t q = 0; q < queue.size(); ++q) {
        const std::size_t u = queue[q];
        if (u < n) {
          for (std::size_t j = 0; j < m; ++j) {
            if (level[n + j] < 0 && tight(u, j)) {
              level[n + j] = level[u] + 1;
              queue.push_back(n + j);
            }
          }
        } else {
          const std::size_t j = u - n;
          if (demand[j] > 0) {
            sink_reached = true;
            continue;
          }
          for (std::size_t i = 0; i < n; ++i) {
            if (level[i] < 0 && flow[i * m + j] > 0 && tight(i, j)) {
              level[i] = level[u] + 1;
              queue.push_back(i);
            }
          }
        }
      }
      if (!sink_reached) break;

      std::fill(arc.begin(), arc.end(), 0);
      auto next_hop = [&](std::size_t u) -> std::size_t {
        if (u < n) {
          for (; arc[u] < m; ++arc[u]) {
            const std::size_t j = arc[u];
            if (level[n + j] == level[u] + 1 && tight(u, j)) return n + j;
          }
        } else {
          const std::size_t j = u - n;
          for (; arc[u] < n; ++arc[u]) {
            const std::size_t i = arc[u];
            if (level[i] == level[u] + 1 && flow[i * m + j] > 0 && tight(i, j)) return i;
          }
        }
        return nodes;
      };
      for (std::size_t s = 0; s < n; ++s) {
        if (level[s] != 0) continue;
        path.assign(1, s);
        while (!path.empty() && supply[s] > 0) {
          const std::size_t u = path.back();
          if (u >= n && demand[u - n] > 0) {
            std::int64_t push = std::min(supply[s], demand[u - n]);
            for (std::size_t d = 1; d < path.size(); ++d) {
              if (path[d] < n) push = std::min(push, flow[path[d] * m + (path[d - 1] - n)]);
            }
            for (std::size_t d = 1; d < path.size(); ++d) {
              if (path[d] >= n) {
                flow[path[d - 1] * m + (path[d] - n)] += push;
              } else {
                flow[path[d] * m + (path[d - 1] - n)] -= push;
              }
            }
            supply[s] -= push;
            demand[u - n] -= push;
            remaining -= push;
            path.resize(1);
            continue;
          }
          const std::size_t v = next_hop(u);
          if (v == nodes) {
            level[u] = -1;  // dead end for the rest of this phase
            path.pop_back();
            if (!path.empty()) ++arc[path.back()];
          } else {
            path.push_back(v);
          }
        }
      }
    }
  }

  TransportResult result{0.0, {}, Coupling{mu, nu, masses.total, {}},
                         TransportMethod::kExact, phases};
  unsigned __int128 total_cost = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::int64_t x = flow[i * m + j];
      if (x == 0) continue;
      result.coupling.entries.push_back({i, j, static_cast<std::uint64_t>(x)});
      total_cost += static_cast<unsigned __int128>(x) * cost[i * m + j];
    }
  }
  result.exact = {total_cost,
                  static_cast<unsigned __int128>(masses.total) * mu.block_len()};
  result.value = result.exact.to_double();
  return result;
}

/// Feasible coupling that fills pairs in order of increasing cost (ties by
/// atom indices). An upper bound on the exact value.
inline TransportResult dbar_greedy(const BlockDist& mu, const BlockDist& nu) {
  detail::check_comparable(mu, nu);
  const std::size_t n = mu.support_size(), m = nu.support_size();
  auto masses = detail::scale_to_common_total(mu, nu);
  const unsigned bits = mu.alphabet().bits_per_symbol();
  TransportResult result{0.0, {}, Coupling{mu, nu, masses.total, {}},
                         TransportMethod::kGreedy, 0};
  std::int64_t remaining = static_cast<std::int64_t>(masses.total);
  unsigned __int128 total_cost = 0;
  for (std::size_t c = 0; c <= mu.block_len() && remaining > 0; ++c) {
    ++result.iterations;
    for (std::size_t i = 0; i < n && remaining > 0; ++i) {
      if (masses.supply[i] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (masses.demand[j] == 0) continue;
        if (block_mismatches(mu.atoms()[i].code, nu.atoms()[j].code, bits) != c) continue;
        const std::int64_t x = std::min(masses.supply[i], masses.demand[j]);
        masses.supply[i] -= x;
        masses.demand[j] -= x;
        remaining -= x;
        result.coupling.entries.push_back({i, j, static_cast<std::uint64_t>(x)});
        total_cost += static_cast<unsigned __int128>(x) * c;
        if (masses.supply[i] == 0) break;
      }
    }
  }
  result.exact = {total_cost,
                  static_cast<unsigned __int128>(masses.total) * mu.block_len()};
  result.value = result.exact.to_double();
  return result;
}

/// Independent coupling mu x nu.
inline TransportResult dbar_product(const BlockDist& mu, const BlockDist& nu) {
  detail::check_comparable(mu, nu);
  const unsigned __int128 denom = static_cast<unsigned __int128>(mu.total()) * nu.total();
  if (denom >> 64) throw Error(ErrorKind::kTooLarge, "product coupling denominator overflows");
  const unsigned bits = mu.alphabet().bits_per_symbol();
  TransportResult result{0.0, {}, Coupling{mu, nu, static_cast<std::uint64_t>(denom), {}},
                         TransportMethod::kProduct, 1};
  unsigned __int128 total_cost = 0;
  for (std::size_t i = 0; i < mu.support_size(); ++i) {
    for (std::size_t j = 0; j < nu.support_size(); ++j) {
      const std::uint64_t mass = mu.atoms()[i].count * nu.atoms()[j].count;
      result.coupling.entries.push_back({i, j, mass});
      total_cost += static_cast<unsigned __int128>(mass) *
                    block_mismatches(mu.atoms()[i].code, nu.atoms()[j].code, bits);
    }
  }
  result.exact = {total_cost, denom * mu.block_len()};
  result.value = result.exact.to_double();
  return result;
}

/// Closed-form optimum when both supports have at most two atoms: the
/// couplings form a segment in the mass t placed on (a1, b1), and the linear
/// objective is minimised at one of its endpoints.
inline ExactValue dbar_2x2_oracle_exact(const BlockDist& mu, const BlockDist& nu) {
  detail::check_comparable(mu, nu);
  if (mu.support_size() > 2 || nu.support_size() > 2) {
    throw Error(ErrorKind::kTooLarge, "2x2 oracle needs supports of size <= 2");
  }
  using I = __int128;
  const unsigned bits = mu.alphabet().bits_per_symbol();
  auto d = [&](std::size_t i, std::size_t j) -> I {
    return block_mismatches(mu.atoms()[i].code, nu.atoms()[j].code, bits);
  };
  // Masses over the common denominator total_mu * total_nu.
  const I total = static_cast<I>(mu.total()) * nu.total();
  std::vector<I> a, b;
  for (const auto& x : mu.atoms()) a.push_back(static_cast<I>(x.count) * nu.total());
  for (const auto& y : nu.atoms()) b.push_back(static_cast<I>(y.count) * mu.total());

  I best = 0;
  if (a.size() == 1) {
    for (std::size_t j = 0; j < b.size(); ++j) best += b[j] * d(0, j);
  } else if (b.size() == 1) {
    for (std::size_t i = 0; i < a.size(); ++i) best += a[i] * d(i, 0);
  } else {
    auto objective = [&](I t) {
      return t * d(0, 0) + (a[0] - t) * d(0, 1) + (b[0] - t) * d(1, 0) +
             (a[1] - b[0] + t) * d(1, 1);
    };
    const I lo = std::max<I>(0, a[0] - b[1]);
    const I hi = std::min(a[0], b[0]);
    best = std::min(objective(lo), objective(hi));
  }
  return {static_cast<unsigned __int128>(best),
          static_cast<unsigned __int128>(total) * mu.block_len()};
}

inline double dbar_2x2_oracle(const BlockDist& mu, const BlockDist& nu) {
  return dbar_2x2_oracle_exact(mu, nu).to_double();
}

inline TransportResult dbar(const BlockDist& mu, const BlockDist& nu, TransportMethod method) {
  switch (method) {
    case TransportMethod::kExact: return dbar_exact(mu, nu);
    case TransportMethod::kGreedy: return dbar_greedy(mu, nu);
    case TransportMethod::kProduct: return dbar_product(mu, nu);
  }
  throw Error(ErrorKind::kInvalidInput, "unknown transport method");
}

/// Exact when the support guard allows it, greedy upper bound otherwise.
inline TransportResult dbar_best_effort(const BlockDist& mu, const BlockDist& nu) {
  if (static_cast<std::uint64_t>(mu.support_size()) * nu.support_size() <= kMaxExactPairs) {
    return dbar_exact(mu, nu);
  }
  return dbar_greedy(mu, nu);
}

}  // namespace pinsker
