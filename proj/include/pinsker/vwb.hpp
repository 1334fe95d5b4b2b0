// Empirical very-weak-Bernoulli scores, the relative (factor-conditioned)
// variant, extremality of a supplied partition and the marker-conditional
// independence statistic.
//
// Window conventions: a window starting at t has future block w[t, t+l) and
// past w[t-m, t). Factor windows are centred at the block start, y[t-k, t+k],
// with y[j] aligned to x[j + y_offset]. Only windows lying entirely inside the
// words are used.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "pinsker/automaton.hpp"
#include "pinsker/core.hpp"
#include "pinsker/transport.hpp"

namespace pinsker {

struct PastEntry {
  std::string past;
  std::uint64_t count = 0;
  double dbar = 0.0;
};

struct VwbReport {
  std::size_t l = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::uint64_t windows = 0;
  std::size_t retained_pasts = 0;
  double retained_mass = 0.0;
  std::vector<PastEntry> per_past;
  double score = 0.0;
  TransportMethod method = TransportMethod::kExact;
};

struct VwbOptions {
  std::uint64_t min_count = 50;
  std::size_t workers = 1;
  TransportMethod method = TransportMethod::kExact;
};

namespace detail {

inline BlockCode window_code(std::span<const Symbol> data, std::size_t pos,
                             std::size_t len, unsigned bits) {
  return encode_block(data.subspan(pos, len), bits);
}

// Records sharing `cell` form one conditional distribution of `future`.
struct CellRecord {
  BlockCode reference;  // coarser conditioning key (0 when unconditioned)
  BlockCode cell;       // finer key within the reference
  BlockCode future;
  auto key() const { return std::tie(reference, cell, future); }
  friend bool operator<(const CellRecord& a, const CellRecord& b) { return a.key() < b.key(); }
};

struct Cell {
  BlockCode reference;
  BlockCode cell;
  std::size_t first, last;  // record range [first, last)
};

inline std::vector<Cell> group_cells(const std::vector<CellRecord>& records) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    while (j < records.size() && records[j].reference == records[i].reference &&
           records[j].cell == records[i].cell) {
      ++j;
    }
    cells.push_back({records[i].reference, records[i].cell, i, j});
    i = j;
  }
  return cells;
}

inline BlockDist dist_of_futures(const Alphabet& alphabet, std::size_t l,
                                 const std::vector<CellRecord>& records,
                                 std::size_t first, std::size_t last) {
  std::vector<BlockDist::Atom> atoms;
  for (std::size_t i = first; i < last; ++i) {
    if (!atoms.empty() && atoms.back().code == records[i].future) {
      ++atoms.back().count;
    } else {
      atoms.push_back({records[i].future, 1});
    }
  }
  return BlockDist(alphabet, l, std::move(atoms));
}

inline void finish_report(VwbReport& report) {
  std::uint64_t kept = 0;
  long double weighted = 0.0L;
  for (const auto& p : report.per_past) {
    kept += p.count;
    weighted += static_cast<long double>(p.count) * p.dbar;
  }
  if (kept == 0) {
    throw Error(ErrorKind::kNoPastRetained, "every conditioning cell is below min_count");
  }
  report.retained_pasts = report.per_past.size();
  report.retained_mass = static_cast<double>(kept) / static_cast<double>(report.windows);
  report.score = static_cast<double>(weighted / kept);
}

inline std::string render_code(const Alphabet& alphabet, BlockCode code, std::size_t len) {
  return Word(alphabet, decode_block(code, len, alphabet.bits_per_symbol())).str();
}

}  // namespace detail

/// Count-weighted mean over pasts of d-bar(conditional future law, future law).
inline VwbReport vwb_score(const Word& w, std::size_t l, std::size_t m,
                           const VwbOptions& options = {}) {
  if (l == 0 || m == 0) throw Error(ErrorKind::kInvalidInput, "l and m must be positive");
  if (m + l > w.size()) {
    throw Error(ErrorKind::kWordTooShort, "word shorter than m + l");
  }
  check_codable(w.alphabet(), l);
  check_codable(w.alphabet(), m);
  const unsigned bits = w.alphabet().bits_per_symbol();
  const auto data = w.symbols();
  const std::size_t windows = w.size() - m - l + 1;

  std::vector<detail::CellRecord> records(windows);
  for (std::size_t s = 0; s < windows; ++s) {
    records[s] = {0, detail::window_code(data, s, m, bits),
                  detail::window_code(data, s + m, l, bits)};
  }
  std::vector<detail::CellRecord> marginal_records = records;
  for (auto& r : marginal_records) r.cell = 0;
  std::sort(marginal_records.begin(), marginal_records.end());
  const BlockDist marginal =
      detail::dist_of_futures(w.alphabet(), l, marginal_records, 0, windows);
  marginal_records.clear();

  std::sort(records.begin(), records.end());
  std::vector<detail::Cell> cells = detail::group_cells(records);
  std::erase_if(cells, [&](const detail::Cell& c) { return c.last - c.first < options.min_count; });

  VwbReport report;
  report.l = l;
  report.m = m;
  report.windows = windows;
  report.method = options.method;
  report.per_past.resize(cells.size());
  detail::parallel_for(cells.size(), options.workers, [&](std::size_t i) {
    const auto& c = cells[i];
    BlockDist cond = detail::dist_of_futures(w.alphabet(), l, records, c.first, c.last);
    report.per_past[i] = {detail::render_code(w.alphabet(), c.cell, m), c.last - c.first,
                          dbar(cond, marginal, options.method).value};
  });
  detail::finish_report(report);
  return report;
}

/// Relative score of x over a factor y: cells are (y[t-k, t+k], x[t-m, t));
/// each cell's future law is compared with the future law given y[t-k, t+k]
/// alone.
inline VwbReport relative_vwb_score(const Word& x, const Word& y, std::size_t l, std::size_t m,
                                    std::size_t k, const VwbOptions& options = {},
                                    std::size_t y_offset = 0) {
  if (l == 0 || m == 0) throw Error(ErrorKind::kInvalidInput, "l and m must be positive");
  if (y_offset > x.size() || y.size() > x.size() - y_offset) {
    throw Error(ErrorKind::kAlignmentError, "factor word extends past the source word");
  }
  const std::size_t span_y = 2 * k + 1;
  check_codable(y.alphabet(), span_y);
  check_codable(x.alphabet(), l);
  check_codable(x.alphabet(), m);
  // Block start t (x coordinates) needs t >= m, t - y_offset >= k,
  // t - y_offset + k < |y| and t + l <= |x|.
  const std::size_t t_first = std::max(m, y_offset + k);
  const std::size_t t_end_y = y_offset + (y.size() >= k ? y.size() - k : 0);  // exclusive
  const std::size_t t_end_x = x.size() >= l ? x.size() - l + 1 : 0;
  const std::size_t t_end = std::min(t_end_y, t_end_x);
  if (t_end <= t_first) {
    throw Error(ErrorKind::kWordTooShort, "no window fits 2k+1+m+l in the usable length");
  }
  const unsigned bx = x.alphabet().bits_per_symbol();
  const unsigned by = y.alphabet().bits_per_symbol();
  const auto xd = x.symbols();
  const auto yd = y.symbols();
  const std::size_t windows = t_end - t_first;

  std::vector<detail::CellRecord> records(windows);
  for (std::size_t s = 0; s < windows; ++s) {
    const std::size_t t = t_first + s;
    records[s] = {detail::window_code(yd, t - y_offset - k, span_y, by),
                  detail::window_code(xd, t - m, m, bx), detail::window_code(xd, t, l, bx)};
  }
  std::sort(records.begin(), records.end());

  // Reference law per factor window: records are sorted by reference first,
  // so each reference is a contiguous range.
  std::vector<std::pair<std::size_t, std::size_t>> ref_range;
  std::vector<BlockCode> ref_key;
  for (std::size_t i = 0; i < records.size();) {
    std::size_t j = i;
    while (j < records.size() && records[j].reference == records[i].reference) ++j;
    ref_key.push_back(records[i].reference);
    ref_range.emplace_back(i, j);
    i = j;
  }

  std::vector<detail::Cell> cells = detail::group_cells(records);
  std::erase_if(cells, [&](const detail::Cell& c) { return c.last - c.first < options.min_count; });

  VwbReport report;
  report.l = l;
  report.m = m;
  report.k = k;
  report.windows = windows;
  report.method = options.method;
  report.per_past.resize(cells.size());
  detail::parallel_for(cells.size(), options.workers, [&](std::size_t i) {
    const auto& c = cells[i];
    const auto r = static_cast<std::size_t>(
        std::lower_bound(ref_key.begin(), ref_key.end(), c.reference) - ref_key.begin());
    // Reference records are sorted by (cell, future); re-sort futures.
    std::vector<detail::CellRecord> ref(records.begin() + ref_range[r].first,
                                        records.begin() + ref_range[r].second);
    for (auto& rec : ref) rec.cell = 0;
    std::sort(ref.begin(), ref.end());
    BlockDist reference = detail::dist_of_futures(x.alphabet(), l, ref, 0, ref.size());
    BlockDist cond = detail::dist_of_futures(x.alphabet(), l, records, c.first, c.last);
    report.per_past[i] = {detail::render_code(y.alphabet(), c.reference, span_y) + "|" +
                              detail::render_code(x.alphabet(), c.cell, m),
                          c.last - c.first, dbar(cond, reference, options.method).value};
  });
  detail::finish_report(report);
  return report;
}

// ---------------------------------------------------------------------------
// Extremality of a supplied partition

struct ExtremalityCell {
  std::uint64_t cell = 0;
  double mass = 0.0;
  double dbar = 0.0;
  TransportMethod method = TransportMethod::kExact;
};

struct ExtremalityProfile {
  double fraction_good = 0.0;
  std::size_t cell_count = 0;
  std::vector<ExtremalityCell> per_cell;
};

/// For each label value b, d-bar between the law of the l-window given b and
/// the law of all l-windows. Cells whose support product exceeds the exact
/// solver guard use the greedy upper bound, which can only under-count good
/// cells.
inline ExtremalityProfile extremality_profile(const Word& w, const std::vector<std::uint64_t>& labels,
                                              std::size_t l, double eps, std::size_t workers = 1) {
  if (l == 0 || l > w.size()) throw Error(ErrorKind::kBlockTooLong, "invalid block length");
  if (!(eps > 0.0)) throw Error(ErrorKind::kOutOfRange, "eps must be positive");
  const std::size_t windows = w.size() - l + 1;
  if (labels.size() != windows) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(labels.size()) + " labels for " + std::to_string(windows) +
                    " windows");
  }
  check_codable(w.alphabet(), l);
  const unsigned bits = w.alphabet().bits_per_symbol();
  std::vector<detail::CellRecord> records(windows);
  for (std::size_t t = 0; t < windows; ++t) {
    records[t] = {0, labels[t], detail::window_code(w.symbols(), t, l, bits)};
  }
  const BlockDist marginal = empirical_block_dist(w, l);
  std::sort(records.begin(), records.end());
  const auto cells = detail::group_cells(records);

  ExtremalityProfile profile;
  profile.cell_count = cells.size();
  profile.per_cell.resize(cells.size());
  detail::parallel_for(cells.size(), workers, [&](std::size_t i) {
    const auto& c = cells[i];
    BlockDist cond = detail::dist_of_futures(w.alphabet(), l, records, c.first, c.last);
    TransportResult r = dbar_best_effort(cond, marginal);
    profile.per_cell[i] = {c.cell, static_cast<double>(c.last - c.first) / windows, r.value,
                           r.method};
  });
  long double good = 0.0L;
  for (const auto& c : profile.per_cell) {
    if (c.dbar <= eps) good += c.mass;
  }
  profile.fraction_good = static_cast<double>(good);
  return profile;
}

/// Label of window t = code of y[t, t+len).
inline std::vector<std::uint64_t> window_labels(const Word& y, std::size_t len, std::size_t count) {
  check_codable(y.alphabet(), len);
  if (count > 0 && count - 1 + len > y.size()) {
    throw Error(ErrorKind::kWordTooShort, "not enough label windows");
  }
  std::vector<std::uint64_t> out(count);
  for (std::size_t t = 0; t < count; ++t) {
    out[t] = detail::window_code(y.symbols(), t, len, y.alphabet().bits_per_symbol());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Marker-conditional independence

enum class MarkerMode {
  /// Every i with x[i..i+n] constant equal to the marker symbol; past is
  /// x[i-p, i), future x[i+n+1, i+n+1+f).
  kPositions,
  /// Every maximal run [i, i+R) of the marker symbol in the n-fold eroded
  /// word with R >= min_run; past is x[i-p, i), future starts where the
  /// corresponding run of x ends, at i+R+n.
  kMaximalRuns,
};

struct MarkerOptions {
  MarkerMode mode = MarkerMode::kPositions;
  Symbol marker = 1;
  std::size_t min_run = 1;
  std::uint64_t min_count = 1;
};

struct MarkerStats {
  double mi_nats = 0.0;
  double chi2 = 0.0;
  std::uint64_t dof = 0;
  std::uint64_t samples = 0;
};

/// Plug-in mutual information and Pearson chi-square of a contingency table
/// given as (row, column) observations.
inline MarkerStats contingency_stats(const std::vector<std::pair<BlockCode, BlockCode>>& pairs) {
  MarkerStats out;
  out.samples = pairs.size();
  if (pairs.empty()) return out;
  std::map<BlockCode, std::uint64_t> rows, cols;
  std::map<std::pair<BlockCode, BlockCode>, std::uint64_t> joint;
  for (const auto& p : pairs) {
    ++rows[p.first];
    ++cols[p.second];
    ++joint[p];
  }
  const long double n = static_cast<long double>(pairs.size());
  long double mi = 0.0L;
  for (const auto& [key, c] : joint) {
    const long double pab = c / n;
    mi += pab * std::log(c * n / (static_cast<long double>(rows[key.first]) * cols[key.second]));
  }
  long double chi2 = 0.0L;
  for (const auto& [r, rc] : rows) {
    for (const auto& [c, cc] : cols) {
      const long double expected = static_cast<long double>(rc) * cc / n;
      auto it = joint.find({r, c});
      const long double observed = it == joint.end() ? 0.0L : it->second;
      chi2 += (observed - expected) * (observed - expected) / expected;
    }
  }
  out.mi_nats = std::max(0.0, static_cast<double>(mi));
  out.chi2 = static_cast<double>(chi2);
  out.dof = (rows.size() - 1) * (cols.size() - 1);
  return out;
}

inline MarkerStats marker_independence(const Word& x, std::size_t n, std::size_t p, std::size_t f,
                                       const MarkerOptions& options = {}) {
  if (n < 1) throw Error(ErrorKind::kInvalidInput, "n must be >= 1");
  if (p == 0 || f == 0) throw Error(ErrorKind::kInvalidInput, "past and future lengths must be positive");
  if (options.marker >= x.alphabet().size() || options.marker == x.alphabet().zero()) {
    throw Error(ErrorKind::kInvalidInput, "marker must be a nonzero symbol of the alphabet");
  }
  if (x.size() < n + 1 + p + f) throw Error(ErrorKind::kWordTooShort, "word too short for markers");
  check_codable(x.alphabet(), p);
  check_codable(x.alphabet(), f);
  const unsigned bits = x.alphabet().bits_per_symbol();
  const auto xd = x.symbols();
  const std::vector<Symbol> eroded = erode(xd, n, x.alphabet().zero());

  std::vector<std::pair<BlockCode, BlockCode>> pairs;
  auto take = [&](std::size_t i, std::size_t future_start) {
    if (i < p || future_start + f > xd.size()) return;
    pairs.emplace_back(detail::window_code(xd, i - p, p, bits),
                       detail::window_code(xd, future_start, f, bits));
  };
  if (options.mode == MarkerMode::kPositions) {
    for (std::size_t i = 0; i < eroded.size(); ++i) {
      if (eroded[i] == options.marker) take(i, i + n + 1);
    }
  } else {
    for (std::size_t i = 0; i < eroded.size();) {
      if (eroded[i] != options.marker) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < eroded.size() && eroded[j] == options.marker) ++j;
      // Runs touching either end of the word are not known to be maximal.
      if (j - i >= options.min_run && i > 0 && j < eroded.size()) take(i, j + n);
      i = j;
    }
  }
  if (pairs.empty()) throw Error(ErrorKind::kNoMarkers, "no marker position qualifies");
  if (pairs.size() < options.min_count) {
    throw Error(ErrorKind::kNoMarkers, std::to_string(pairs.size()) +
                                           " markers, fewer than min_count " +
                                           std::to_string(options.min_count));
  }
  return contingency_stats(pairs);
}

}  // namespace pinsker
