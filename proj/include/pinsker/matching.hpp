// Hall's marriage condition: injective assignments respecting neighbourhoods,
// or a subset of the left side whose neighbourhood is too small.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pinsker/core.hpp"

namespace pinsker {

struct AssignmentProblem {
  std::size_t left_size = 0;
  std::size_t right_size = 0;
  std::vector<std::vector<std::size_t>> neighbors;

  AssignmentProblem() = default;
  AssignmentProblem(std::size_t right, std::vector<std::vector<std::size_t>> nbrs)
      : left_size(nbrs.size()), right_size(right), neighbors(std::move(nbrs)) {
    validate();
  }

  void validate() const {
    if (neighbors.size() != left_size) {
      throw Error(ErrorKind::kInvalidInput, "neighbor list count differs from left_size");
    }
    for (std::size_t e = 0; e < left_size; ++e) {
      const auto& js = neighbors[e];
      for (std::size_t k = 0; k < js.size(); ++k) {
        if (js[k] >= right_size) {
          throw Error(ErrorKind::kInvalidInput, "neighbor " + std::to_string(js[k]) +
                                                    " of left " + std::to_string(e) +
                                                    " out of range");
        }
        if (k > 0 && js[k] <= js[k - 1]) {
          throw Error(ErrorKind::kInvalidInput,
                      "neighbors of left " + std::to_string(e) + " not sorted and unique");
        }
      }
    }
  }
};

struct HallWitness {
  std::vector<std::size_t> subset;  // sorted left indices
};

/// psi[e] is the right vertex assigned to e.
using Assignment = std::vector<std::size_t>;
using HallOutcome = std::variant<Assignment, HallWitness>;

/// Size of the union of the neighbourhoods of `subset`.
inline std::size_t neighborhood_size(const AssignmentProblem& p,
                                     const std::vector<std::size_t>& subset) {
  std::vector<char> seen(p.right_size, 0);
  std::size_t count = 0;
  for (std::size_t e : subset) {
    for (std::size_t f : p.neighbors.at(e)) {
      if (!seen[f]) {
        seen[f] = 1;
        ++count;
      }
    }
  }
  return count;
}

inline bool is_violating(const AssignmentProblem& p, const HallWitness& w) {
  return w.subset.size() > neighborhood_size(p, w.subset);
}

inline bool is_valid_assignment(const AssignmentProblem& p, const Assignment& psi) {
  if (psi.size() != p.left_size) return false;
  std::vector<char> used(p.right_size, 0);
  for (std::size_t e = 0; e < psi.size(); ++e) {
    const auto& js = p.neighbors[e];
    if (!std::binary_search(js.begin(), js.end(), psi[e])) return false;
    if (used[psi[e]]) return false;
    used[psi[e]] = 1;
  }
  return true;
}

namespace detail {

inline constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);

// Kuhn's augmenting path search from `root`, iterative to keep the
// stack bounded on long paths.
inline bool augment(const AssignmentProblem& p, std::size_t root, std::vector<std::size_t>& match_left,
                    std::vector<std::size_t>& match_right, std::vector<char>& visited_right) {
  struct Frame {
    std::size_t e;
    std::size_t next;
  };
  std::vector<Frame> stack{{root, 0}};
  std::vector<std::size_t> via;  // right vertex chosen at each frame
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& js = p.neighbors[top.e];
    bool descended = false;
    while (top.next < js.size()) {
      const std::size_t f = js[top.next++];
      if (visited_right[f]) continue;
      visited_right[f] = 1;
      if (match_right[f] == kUnmatched) {
        via.push_back(f);
        // Flip the path.
        for (std::size_t d = stack.size(); d-- > 0;) {
          const std::size_t e = stack[d].e;
          match_left[e] = via[d];
          match_right[via[d]] = e;
        }
        return true;
      }
      via.push_back(f);
      stack.push_back({match_right[f], 0});
      descended = true;
      break;
    }
    if (!descended) {
      stack.pop_back();
      if (!stack.empty()) via.pop_back();
    }
  }
  return false;
}

}  // namespace detail

/// Maximum matching by augmenting paths, left vertices in index order and
/// candidates in sorted order. On failure returns the left vertices reachable
/// from an unmatched left vertex by alternating paths, which violate Hall.
inline HallOutcome hall_matching(const AssignmentProblem& p) {
  p.validate();
  std::vector<std::size_t> match_left(p.left_size, detail::kUnmatched);
  std::vector<std::size_t> match_right(p.right_size, detail::kUnmatched);
  std::optional<std::size_t> free_left;
  for (std::size_t e = 0; e < p.left_size; ++e) {
    std::vector<char> visited(p.right_size, 0);
    if (!detail::augment(p, e, match_left, match_right, visited) && !free_left) free_left = e;
  }
  if (!free_left) return Assignment(match_left.begin(), match_left.end());

  // Alternating BFS: left -> any neighbour, right -> its partner.
  std::vector<char> in_left(p.left_size, 0), in_right(p.right_size, 0);
  std::vector<std::size_t> queue{*free_left};
  in_left[*free_left] = 1;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    for (std::size_t f : p.neighbors[queue[q]]) {
      if (in_right[f]) continue;
      in_right[f] = 1;
      const std::size_t partner = match_right[f];
      if (partner != detail::kUnmatched && !in_left[partner]) {
        in_left[partner] = 1;
        queue.push_back(partner);
      }
    }
  }
  HallWitness w;
  for (std::size_t e = 0; e < p.left_size; ++e) {
    if (in_left[e]) w.subset.push_back(e);
  }
  return w;
}

/// Exhaustive subset check of Hall's condition for left_size <= max_subset_enum
/// (smallest violating subset in subset-mask order), matching otherwise.
inline std::optional<HallWitness> hall_check(const AssignmentProblem& p,
                                             std::size_t max_subset_enum = 20) {
  p.validate();
  if (p.left_size > max_subset_enum || p.left_size >= 63) {
    auto outcome = hall_matching(p);
    if (auto* w = std::get_if<HallWitness>(&outcome)) return *w;
    return std::nullopt;
  }
  // Neighbourhood unions as bitsets over the right side.
  const std::size_t words = (p.right_size + 63) / 64;
  std::vector<std::vector<std::uint64_t>> masks(p.left_size, std::vector<std::uint64_t>(words, 0));
  for (std::size_t e = 0; e < p.left_size; ++e) {
    for (std::size_t f : p.neighbors[e]) masks[e][f / 64] |= std::uint64_t{1} << (f % 64);
  }
  const std::uint64_t subsets = std::uint64_t{1} << p.left_size;
  std::vector<std::uint64_t> acc(words);
  for (std::uint64_t s = 1; s < subsets; ++s) {
    std::fill(acc.begin(), acc.end(), 0);
    std::size_t size = 0;
    for (std::size_t e = 0; e < p.left_size; ++e) {
      if (!((s >> e) & 1)) continue;
      ++size;
      for (std::size_t k = 0; k < words; ++k) acc[k] |= masks[e][k];
    }
    std::size_t covered = 0;
    for (auto word : acc) covered += static_cast<std::size_t>(std::popcount(word));
    if (size > covered) {
      HallWitness w;
      for (std::size_t e = 0; e < p.left_size; ++e) {
        if ((s >> e) & 1) w.subset.push_back(e);
      }
      return w;
    }
  }
  return std::nullopt;
}

}  // namespace pinsker
