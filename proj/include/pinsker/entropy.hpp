// Shannon and conditional entropy, Fano bounds, block-entropy rate estimates
// and the entropy scan along the erosion filtration. Natural-log units.

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pinsker/automaton.hpp"
#include "pinsker/core.hpp"

namespace pinsker {

inline double phi(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::kOutOfRange, "phi argument must lie in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log(x);
}

namespace detail {

// Sum of phi(c / total) over counts, accumulated in long double.
template <typename Counts>
double entropy_of_counts(const Counts& counts, std::uint64_t total) {
  if (total == 0) return 0.0;
  long double acc = 0.0L;
  for (std::uint64_t c : counts) {
    if (c == 0 || c == total) continue;
    const long double p = static_cast<long double>(c) / total;
    acc -= p * std::log(p);
  }
  return static_cast<double>(acc);
}

inline std::vector<std::uint64_t> counts_of(const BlockDist& d) {
  std::vector<std::uint64_t> out;
  out.reserve(d.support_size());
  for (const auto& a : d.atoms()) out.push_back(a.count);
  return out;
}

}  // namespace detail

inline double shannon(const BlockDist& d) {
  return detail::entropy_of_counts(detail::counts_of(d), d.total());
}

/// H(X1 | X2) for a joint over concatenated words x1 x2, with x1 the first
/// `split` symbols.
inline double conditional_entropy(const BlockDist& joint, std::size_t split) {
  if (split == 0 || split >= joint.block_len()) {
    throw Error(ErrorKind::kBadSplit,
                "split " + std::to_string(split) + " for block length " +
                    std::to_string(joint.block_len()));
  }
  const unsigned bits = joint.alphabet().bits_per_symbol();
  const std::size_t tail = joint.block_len() - split;
  const BlockCode tail_mask =
      tail * bits >= 64 ? ~BlockCode{0} : (BlockCode{1} << (tail * bits)) - 1;
  // Group by the conditioning part x2 (the low-order symbols).
  std::map<BlockCode, std::vector<std::uint64_t>> groups;
  for (const auto& a : joint.atoms()) groups[a.code & tail_mask].push_back(a.count);
  long double acc = 0.0L;
  const long double total = static_cast<long double>(joint.total());
  for (const auto& [key, counts] : groups) {
    std::uint64_t group_total = 0;
    for (auto c : counts) group_total += c;
    acc += (group_total / total) *
           static_cast<long double>(detail::entropy_of_counts(counts, group_total));
  }
  return static_cast<double>(acc);
}

/// Fano: H(X1 | X2) <= phi(d) + phi(1 - d) + d ln(#A - 1) with d = P(X1 != X2).
inline double fano_bound(double d, std::size_t alpha_size) {
  if (!(d >= 0.0 && d <= 1.0)) throw Error(ErrorKind::kOutOfRange, "d must lie in [0, 1]");
  if (alpha_size < 2) throw Error(ErrorKind::kOutOfRange, "alphabet size must be >= 2");
  return phi(d) + phi(1.0 - d) + d * std::log(static_cast<double>(alpha_size - 1));
}

/// eps (1 + ln(1/eps) + ln(#A - 1)), valid for 0 < eps < 1/e.
inline double fano_simple_bound(double eps, std::size_t alpha_size) {
  if (!(eps > 0.0 && eps < std::exp(-1.0))) {
    throw Error(ErrorKind::kOutOfRange, "eps must lie in (0, 1/e)");
  }
  if (alpha_size < 2) throw Error(ErrorKind::kOutOfRange, "alphabet size must be >= 2");
  return eps * (1.0 + std::log(1.0 / eps) + std::log(static_cast<double>(alpha_size - 1)));
}

enum class RateMethod { kRatio, kDifference };

inline const char* to_string(RateMethod m) {
  return m == RateMethod::kRatio ? "ratio" : "difference";
}

struct EntropyEstimate {
  double value_nats = 0.0;
  std::size_t block_len = 0;
  RateMethod method = RateMethod::kDifference;
  std::uint64_t sample_size = 0;     // number of l-windows
  std::size_t distinct_blocks = 0;   // observed l-block support
};

/// Plug-in block entropy of the l-windows of `symbols`.
inline double block_entropy(std::span<const Symbol> symbols, unsigned bits,
                            std::size_t block_len, std::size_t workers,
                            std::size_t* distinct = nullptr) {
  auto atoms = count_blocks(symbols, bits, block_len, workers);
  std::vector<std::uint64_t> counts;
  counts.reserve(atoms.size());
  std::uint64_t total = 0;
  for (const auto& a : atoms) {
    counts.push_back(a.count);
    total += a.count;
  }
  if (distinct) *distinct = atoms.size();
  return detail::entropy_of_counts(counts, total);
}

/// Ratio H(l)/l or difference H(l) - H(l-1) of plug-in block entropies,
/// clipped to [0, ln #A].
inline EntropyEstimate entropy_rate(const Word& w, std::size_t block_len,
                                    RateMethod method = RateMethod::kDifference,
                                    std::size_t workers = 1) {
  if (block_len == 0) throw Error(ErrorKind::kInvalidInput, "block length must be positive");
  if (block_len > w.size()) {
    throw Error(ErrorKind::kBlockTooLong,
                "block length " + std::to_string(block_len) +
                    " exceeds word length " + std::to_string(w.size()));
  }
  if (method == RateMethod::kDifference && block_len < 2) {
    throw Error(ErrorKind::kInvalidInput, "difference estimator needs l >= 2");
  }
  check_codable(w.alphabet(), block_len);
  const unsigned bits = w.alphabet().bits_per_symbol();
  EntropyEstimate est;
  est.block_len = block_len;
  est.method = method;
  est.sample_size = w.size() - block_len + 1;
  const double h_l = block_entropy(w.symbols(), bits, block_len, workers, &est.distinct_blocks);
  double value = 0.0;
  if (method == RateMethod::kRatio) {
    value = h_l / static_cast<double>(block_len);
  } else {
    value = h_l - block_entropy(w.symbols(), bits, block_len - 1, workers);
  }
  const double ceiling = std::log(static_cast<double>(w.alphabet().size()));
  est.value_nats = std::clamp(value, 0.0, ceiling);
  return est;
}

// ---------------------------------------------------------------------------
// Decay scan

/// ln(#A n^2) / n, the block-count bound for the n-th filtration level.
inline double general_entropy_bound(std::size_t alpha_size, std::size_t n) {
  if (n == 0) throw Error(ErrorKind::kOutOfRange, "general bound needs n >= 1");
  const double nn = static_cast<double>(n);
  return std::log(static_cast<double>(alpha_size) * nn * nn) / nn;
}

/// 3 ln(2) 2^(-n/2), the bound for the fair-coin shift.
inline double binary_entropy_bound(std::size_t n) {
  return 3.0 * std::log(2.0) * std::pow(2.0, -static_cast<double>(n) / 2.0);
}

struct DecayRow {
  std::size_t n = 0;
  double h_hat = 0.0;
  std::optional<double> bound_general;
  std::optional<double> bound_binary;
  std::size_t block_len = 0;
  std::uint64_t windows = 0;
  std::size_t distinct_blocks = 0;
};

struct BlockSchedule {
  std::function<std::size_t(std::size_t)> block_len_of_n =
      [](std::size_t n) { return n + 6; };
  /// Shrinks l while windows / distinct_blocks < min_windows_per_block.
  double min_windows_per_block = 20.0;
};

inline std::vector<DecayRow> decay_scan(const Word& w, std::size_t n_max,
                                        const BlockSchedule& schedule = {},
                                        std::size_t workers = 1) {
  const std::size_t l_max = schedule.block_len_of_n(n_max);
  if (w.size() < l_max || n_max > w.size() - l_max) {
    throw Error(ErrorKind::kWordTooShort,
                "scan to n = " + std::to_string(n_max) + " needs length >= " +
                    std::to_string(n_max + l_max));
  }
  const bool binary = w.alphabet().size() == 2;
  std::vector<DecayRow> rows;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const Word eroded = n == 0 ? w : apply_iter_fast(w, n);
    std::size_t l = std::max<std::size_t>(2, schedule.block_len_of_n(n));
    EntropyEstimate est = entropy_rate(eroded, l, RateMethod::kDifference, workers);
    while (l > 2 && static_cast<double>(est.sample_size) <
                        schedule.min_windows_per_block * est.distinct_blocks) {
      --l;
      est = entropy_rate(eroded, l, RateMethod::kDifference, workers);
    }
    DecayRow row;
    row.n = n;
    row.h_hat = est.value_nats;
    row.block_len = est.block_len;
    row.windows = est.sample_size;
    row.distinct_blocks = est.distinct_blocks;
    if (n >= 1) {
      row.bound_general = general_entropy_bound(w.alphabet().size(), n);
      if (binary) row.bound_binary = binary_entropy_bound(n);
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Shannon-McMillan-Breiman support

/// Mass of atoms whose probability p satisfies
/// exp(-(h + eps) l) <= p <= exp(-(h - eps) l).
inline double smb_support(const BlockDist& d, double eps, double h) {
  if (!(eps > 0.0)) throw Error(ErrorKind::kOutOfRange, "eps must be positive");
  const double l = static_cast<double>(d.block_len());
  const double lo = -(h + eps) * l;
  const double hi = -(h - eps) * l;
  long double mass = 0.0L;
  for (std::size_t i = 0; i < d.support_size(); ++i) {
    const double lp = std::log(d.weight(i));
    if (lp >= lo && lp <= hi) mass += static_cast<long double>(d.atoms()[i].count);
  }
  return static_cast<double>(mass / d.total());
}

/// Fraction of the l-windows of `w` whose empirical probability lies in the
/// SMB band.
inline double smb_support(const Word& w, std::size_t block_len, double eps, double h) {
  return smb_support(empirical_block_dist(w, block_len), eps, h);
}

}  // namespace pinsker
