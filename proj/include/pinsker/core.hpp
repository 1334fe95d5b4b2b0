// Shared domain types: alphabets, words, block distributions and couplings.
//
// Blocks of length l over an alphabet with b bits per symbol are packed into a
// single 64-bit code, most significant symbol first, so that numeric order on
// codes equals lexicographic order on symbol indices.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pinsker {

using Symbol = std::uint8_t;
using BlockCode = std::uint64_t;

enum class ErrorKind {
  kUnknownSymbol,
  kBlockTooLong,
  kEmptyWord,
  kWordTooShort,
  kTooLarge,
  kInvalidSpec,
  kBadRank,
  kSampleTooLong,
  kOutOfRange,
  kBadSplit,
  kLengthMismatch,
  kNoPastRetained,
  kAlignmentError,
  kNoMarkers,
  kInvalidInput,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownSymbol: return "UnknownSymbol";
    case ErrorKind::kBlockTooLong: return "BlockTooLong";
    case ErrorKind::kEmptyWord: return "EmptyWord";
    case ErrorKind::kWordTooShort: return "WordTooShort";
    case ErrorKind::kTooLarge: return "TooLarge";
    case ErrorKind::kInvalidSpec: return "InvalidSpec";
    case ErrorKind::kBadRank: return "BadRank";
    case ErrorKind::kSampleTooLong: return "SampleTooLong";
    case ErrorKind::kOutOfRange: return "OutOfRange";
    case ErrorKind::kBadSplit: return "BadSplit";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kNoPastRetained: return "NoPastRetained";
    case ErrorKind::kAlignmentError: return "AlignmentError";
    case ErrorKind::kNoMarkers: return "NoMarkers";
    case ErrorKind::kInvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Ordered set of single-character symbols with one symbol rendered as '0'.
class Alphabet {
 public:
  explicit Alphabet(std::string symbols, std::size_t zero_index = 0)
      : symbols_(std::move(symbols)), zero_index_(zero_index) {
    if (symbols_.empty() || symbols_.size() > 256) {
      throw Error(ErrorKind::kInvalidSpec, "alphabet size must be in [1, 256]");
    }
    std::string sorted = symbols_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorKind::kInvalidSpec, "alphabet symbols must be distinct");
    }
    if (zero_index_ >= symbols_.size() || symbols_[zero_index_] != '0') {
      throw Error(ErrorKind::kInvalidSpec,
                  "zero_index must point at the symbol '0'");
    }
    lookup_.fill(-1);
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      lookup_[static_cast<unsigned char>(symbols_[i])] = static_cast<int>(i);
    }
    bits_ = 1;
    while ((std::size_t{1} << bits_) < symbols_.size()) ++bits_;
  }

  static Alphabet binary() { return Alphabet("01", 0); }
  static Alphabet ornstein() { return Alphabet("0efs", 0); }

  /// Registry names "binary" and "ornstein"; anything else is taken as the
  /// literal symbol list with '0' as the zero symbol.
  static Alphabet from_name(std::string_view name) {
    if (name == "binary") return binary();
    if (name == "ornstein") return ornstein();
    std::string symbols(name);
    auto zero = symbols.find('0');
    if (zero == std::string::npos) {
      throw Error(ErrorKind::kInvalidSpec,
                  "alphabet '" + symbols + "' has no '0' symbol");
    }
    return Alphabet(symbols, zero);
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  const std::string& symbols() const noexcept { return symbols_; }
  char symbol(Symbol index) const { return symbols_.at(index); }
  Symbol zero() const noexcept { return static_cast<Symbol>(zero_index_); }
  std::size_t zero_index() const noexcept { return zero_index_; }
  unsigned bits_per_symbol() const noexcept { return bits_; }

  std::optional<Symbol> index_of(char c) const noexcept {
    int idx = lookup_[static_cast<unsigned char>(c)];
    if (idx < 0) return std::nullopt;
    return static_cast<Symbol>(idx);
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) {
    return a.symbols_ == b.symbols_ && a.zero_index_ == b.zero_index_;
  }

 private:
  std::string symbols_;
  std::size_t zero_index_;
  std::array<int, 256> lookup_{};
  unsigned bits_ = 1;
};

/// Finite sequence of symbol indices over an alphabet.
class Word {
 public:
  explicit Word(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}

  Word(Alphabet alphabet, std::vector<Symbol> data)
      : alphabet_(std::move(alphabet)), data_(std::move(data)) {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      if (data_[i] >= alphabet_.size()) {
        throw Error(ErrorKind::kInvalidInput,
                    "symbol index " + std::to_string(data_[i]) +
                        " at position " + std::to_string(i) +
                        " outside alphabet");
      }
    }
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  Symbol operator[](std::size_t i) const { return data_[i]; }
  std::span<const Symbol> symbols() const noexcept { return data_; }
  const std::vector<Symbol>& data() const noexcept { return data_; }

  Word subword(std::size_t pos, std::size_t len) const {
    if (pos > data_.size() || len > data_.size() - pos) {
      throw Error(ErrorKind::kWordTooShort, "subword out of range");
    }
    return Word(alphabet_, std::vector<Symbol>(data_.begin() + pos,
                                               data_.begin() + pos + len));
  }

  std::string str() const {
    std::string out(data_.size(), '\0');
    for (std::size_t i = 0; i < data_.size(); ++i) {
      out[i] = alphabet_.symbol(data_[i]);
    }
    return out;
  }

  friend bool operator==(const Word& a, const Word& b) {
    return a.alphabet_ == b.alphabet_ && a.data_ == b.data_;
  }

 private:
  Alphabet alphabet_;
  std::vector<Symbol> data_;
};

inline Word parse_word(std::string_view text, const Alphabet& alphabet) {
  std::vector<Symbol> data(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto idx = alphabet.index_of(text[i]);
    if (!idx) {
      throw Error(ErrorKind::kUnknownSymbol,
                  "character '" + std::string(1, text[i]) + "' at position " +
                      std::to_string(i));
    }
    data[i] = *idx;
  }
  return Word(alphabet, std::move(data));
}

inline std::string render(const Word& w) { return w.str(); }

// ---------------------------------------------------------------------------
// Block codes

inline void check_codable(const Alphabet& alphabet, std::size_t block_len) {
  if (block_len * alphabet.bits_per_symbol() > 64) {
    throw Error(ErrorKind::kTooLarge,
                "block length " + std::to_string(block_len) +
                    " does not fit a 64-bit block code");
  }
}

inline BlockCode encode_block(std::span<const Symbol> symbols, unsigned bits) {
  BlockCode code = 0;
  for (Symbol s : symbols) code = (code << bits) | s;
  return code;
}

inline std::vector<Symbol> decode_block(BlockCode code, std::size_t block_len,
                                        unsigned bits) {
  std::vector<Symbol> out(block_len);
  const BlockCode mask = (BlockCode{1} << bits) - 1;
  for (std::size_t i = block_len; i-- > 0;) {
    out[i] = static_cast<Symbol>(code & mask);
    code >>= bits;
  }
  return out;
}

/// Number of symbol positions at which two packed blocks differ.
inline unsigned block_mismatches(BlockCode a, BlockCode b, unsigned bits) {
  BlockCode x = a ^ b;
  if (bits == 1) return static_cast<unsigned>(__builtin_popcountll(x));
  BlockCode low = 0;
  for (unsigned i = 0; i < 64; i += bits) low |= BlockCode{1} << i;
  BlockCode folded = 0;
  for (unsigned k = 0; k < bits; ++k) folded |= (x >> k);
  return static_cast<unsigned>(__builtin_popcountll(folded & low));
}

// ---------------------------------------------------------------------------
// Block distributions

/// Distribution over length-l words stored as exact integer counts over a
/// total. Atoms are sorted by block code and carry strictly positive counts.
class BlockDist {
 public:
  struct Atom {
    BlockCode code;
    std::uint64_t count;
    friend bool operator==(const Atom&, const Atom&) = default;
  };

  BlockDist(Alphabet alphabet, std::size_t block_len, std::vector<Atom> atoms)
      : alphabet_(std::move(alphabet)), block_len_(block_len) {
    if (block_len_ == 0) {
      throw Error(ErrorKind::kInvalidInput, "block length must be positive");
    }
    check_codable(alphabet_, block_len_);
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.code < b.code; });
    const unsigned bits = alphabet_.bits_per_symbol();
    for (const Atom& a : atoms) {
      if (a.count == 0) continue;
      if (block_len_ * bits < 64 && (a.code >> (block_len_ * bits)) != 0) {
        throw Error(ErrorKind::kInvalidInput, "atom code wider than block");
      }
      for (Symbol s : decode_block(a.code, block_len_, bits)) {
        if (s >= alphabet_.size()) {
          throw Error(ErrorKind::kInvalidInput, "atom symbol outside alphabet");
        }
      }
      if (!atoms_.empty() && atoms_.back().code == a.code) {
        atoms_.back().count += a.count;
      } else {
        atoms_.push_back(a);
      }
      if (total_ + a.count < total_) {
        throw Error(ErrorKind::kTooLarge, "count total overflows 64 bits");
      }
      total_ += a.count;
    }
    if (total_ == 0) {
      throw Error(ErrorKind::kInvalidInput, "distribution has zero mass");
    }
  }

  /// Builds from a word -> count table, validating lengths and symbols.
  static BlockDist from_words(
      const Alphabet& alphabet, std::size_t block_len,
      const std::vector<std::pair<std::string, std::uint64_t>>& entries) {
    std::vector<Atom> atoms;
    atoms.reserve(entries.size());
    for (const auto& [text, count] : entries) {
      if (text.size() != block_len) {
        throw Error(ErrorKind::kLengthMismatch,
                    "atom '" + text + "' has length " +
                        std::to_string(text.size()) + ", expected " +
                        std::to_string(block_len));
      }
      Word w = parse_word(text, alphabet);
      atoms.push_back({encode_block(w.symbols(), alphabet.bits_per_symbol()),
                       count});
    }
    return BlockDist(alphabet, block_len, std::move(atoms));
  }

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t block_len() const noexcept { return block_len_; }
  std::uint64_t total() const noexcept { return total_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t support_size() const noexcept { return atoms_.size(); }

  double weight(std::size_t i) const {
    return static_cast<double>(atoms_[i].count) / static_cast<double>(total_);
  }

  Word word(std::size_t i) const {
    return Word(alphabet_, decode_block(atoms_[i].code, block_len_,
                                        alphabet_.bits_per_symbol()));
  }

  std::string atom_string(std::size_t i) const { return word(i).str(); }

  std::uint64_t count_of(const Word& w) const {
    if (w.size() != block_len_) return 0;
    BlockCode code = encode_block(w.symbols(), alphabet_.bits_per_symbol());
    auto it = std::lower_bound(
        atoms_.begin(), atoms_.end(), code,
        [](const Atom& a, BlockCode c) { return a.code < c; });
    return (it != atoms_.end() && it->code == code) ? it->count : 0;
  }

  friend bool operator==(const BlockDist& a, const BlockDist& b) {
    return a.alphabet_ == b.alphabet_ && a.block_len_ == b.block_len_ &&
           a.total_ == b.total_ && a.atoms_ == b.atoms_;
  }

 private:
  Alphabet alphabet_;
  std::size_t block_len_;
  std::uint64_t total_ = 0;
  std::vector<Atom> atoms_;
};

namespace detail {

constexpr unsigned kDenseCountBits = 22;

inline std::vector<BlockDist::Atom> count_range(std::span<const Symbol> data,
                                                unsigned bits,
                                                std::size_t block_len,
                                                std::size_t first,
                                                std::size_t last) {
  // Counts windows starting in [first, last).
  std::vector<BlockDist::Atom> out;
  if (first >= last) return out;
  const unsigned width = bits * static_cast<unsigned>(block_len);
  const BlockCode mask =
      width >= 64 ? ~BlockCode{0} : (BlockCode{1} << width) - 1;
  BlockCode code = 0;
  for (std::size_t i = first; i + 1 < first + block_len; ++i) {
    code = (code << bits) | data[i];
  }
  if (width <= kDenseCountBits) {
    std::vector<std::uint64_t> dense(std::size_t{1} << width, 0);
    for (std::size_t t = first; t < last; ++t) {
      code = ((code << bits) | data[t + block_len - 1]) & mask;
      ++dense[code];
    }
    for (std::size_t c = 0; c < dense.size(); ++c) {
      if (dense[c] != 0) out.push_back({c, dense[c]});
    }
    return out;
  }
  std::unordered_map<BlockCode, std::uint64_t> sparse;
  for (std::size_t t = first; t < last; ++t) {
    code = ((code << bits) | data[t + block_len - 1]) & mask;
    ++sparse[code];
  }
  out.reserve(sparse.size());
  for (const auto& [c, n] : sparse) out.push_back({c, n});
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.code < b.code; });
  return out;
}

inline std::vector<BlockDist::Atom> merge_counts(
    std::vector<std::vector<BlockDist::Atom>> parts) {
  std::vector<BlockDist::Atom> merged;
  for (auto& part : parts) {
    std::vector<BlockDist::Atom> next;
    next.reserve(merged.size() + part.size());
    std::size_t i = 0, j = 0;
    while (i < merged.size() || j < part.size()) {
      if (j == part.size() ||
          (i < merged.size() && merged[i].code < part[j].code)) {
        next.push_back(merged[i++]);
      } else if (i == merged.size() || part[j].code < merged[i].code) {
        next.push_back(part[j++]);
      } else {
        next.push_back({merged[i].code, merged[i].count + part[j].count});
        ++i;
        ++j;
      }
    }
    merged = std::move(next);
  }
  return merged;
}

/// Runs body(i) for i in [0, count) on up to `workers` threads. Each index is
/// handled exactly once; callers write results into per-index slots.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

/// Sorted (code, count) table of all overlapping length-l windows of `data`.
/// With workers > 1 the window starts are sharded (each shard reads l-1
/// symbols past its end) and the shard tables are merged; the result does not
/// depend on the worker count.
inline std::vector<BlockDist::Atom> count_blocks(std::span<const Symbol> data,
                                                 unsigned bits,
                                                 std::size_t block_len,
                                                 std::size_t workers = 1) {
  if (block_len == 0 || block_len > data.size()) return {};
  const std::size_t windows = data.size() - block_len + 1;
  workers = std::max<std::size_t>(1, std::min(workers, windows / 4096 + 1));
  if (workers == 1) {
    return detail::count_range(data, bits, block_len, 0, windows);
  }
  std::vector<std::vector<BlockDist::Atom>> parts(workers);
  std::vector<std::thread> threads;
  const std::size_t chunk = (windows + workers - 1) / workers;
  for (std::size_t k = 0; k < workers; ++k) {
    threads.emplace_back([&, k] {
      std::size_t first = std::min(windows, k * chunk);
      std::size_t last = std::min(windows, first + chunk);
      parts[k] = detail::count_range(data, bits, block_len, first, last);
    });
  }
  for (auto& t : threads) t.join();
  return detail::merge_counts(std::move(parts));
}

/// Frequencies of the length(w) - l + 1 overlapping length-l windows of w.
inline BlockDist empirical_block_dist(const Word& w, std::size_t block_len,
                                      std::size_t workers = 1) {
  if (block_len == 0) {
    throw Error(ErrorKind::kInvalidInput, "block length must be positive");
  }
  if (block_len > w.size()) {
    throw Error(ErrorKind::kBlockTooLong,
                "block length " + std::to_string(block_len) +
                    " exceeds word length " + std::to_string(w.size()));
  }
  check_codable(w.alphabet(), block_len);
  return BlockDist(w.alphabet(), block_len,
                   count_blocks(w.symbols(), w.alphabet().bits_per_symbol(),
                                block_len, workers));
}

/// Exact law of l i.i.d. symbols whose single-symbol law is
/// symbol_counts / sum(symbol_counts).
inline BlockDist product_block_dist(const Alphabet& alphabet,
                                    const std::vector<std::uint64_t>& symbol_counts,
                                    std::size_t block_len) {
  if (symbol_counts.size() != alphabet.size()) {
    throw Error(ErrorKind::kInvalidSpec, "one count per symbol required");
  }
  check_codable(alphabet, block_len);
  const unsigned bits = alphabet.bits_per_symbol();
  std::vector<BlockDist::Atom> atoms{{0, 1}};
  for (std::size_t pos = 0; pos < block_len; ++pos) {
    std::vector<BlockDist::Atom> next;
    for (const auto& a : atoms) {
      for (std::size_t s = 0; s < symbol_counts.size(); ++s) {
        if (symbol_counts[s] == 0) continue;
        unsigned __int128 c =
            static_cast<unsigned __int128>(a.count) * symbol_counts[s];
        if (c >> 63) throw Error(ErrorKind::kTooLarge, "product counts overflow");
        next.push_back({(a.code << bits) | s, static_cast<std::uint64_t>(c)});
      }
    }
    atoms = std::move(next);
  }
  return BlockDist(alphabet, block_len, std::move(atoms));
}

/// Total-variation distance between two block distributions of equal length.
inline double total_variation(const BlockDist& a, const BlockDist& b) {
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  const auto& x = a.atoms();
  const auto& y = b.atoms();
  const double na = static_cast<double>(a.total());
  const double nb = static_cast<double>(b.total());
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].code < y[j].code)) {
      sum += x[i++].count / na;
    } else if (i == x.size() || y[j].code < x[i].code) {
      sum += y[j++].count / nb;
    } else {
      sum += std::abs(x[i++].count / na - y[j++].count / nb);
    }
  }
  return 0.5 * sum;
}

/// Marginal of the first `prefix_len` coordinates.
inline BlockDist prefix_marginal(const BlockDist& d, std::size_t prefix_len) {
  if (prefix_len == 0 || prefix_len > d.block_len()) {
    throw Error(ErrorKind::kBadSplit, "invalid prefix length");
  }
  const unsigned shift = static_cast<unsigned>(
      (d.block_len() - prefix_len) * d.alphabet().bits_per_symbol());
  std::vector<BlockDist::Atom> atoms;
  for (const auto& a : d.atoms()) {
    BlockCode c = shift >= 64 ? 0 : a.code >> shift;
    atoms.push_back({c, a.count});
  }
  return BlockDist(d.alphabet(), prefix_len, std::move(atoms));
}

// ---------------------------------------------------------------------------
// Couplings

/// Joint distribution of two block distributions. Masses are integers over
/// a common denominator `mass_total`.
struct Coupling {
  struct Entry {
    std::size_t left;   // atom index in left_marginal
    std::size_t right;  // atom index in right_marginal
    std::uint64_t mass;
  };

  BlockDist left_marginal;
  BlockDist right_marginal;
  std::uint64_t mass_total = 0;
  std::vector<Entry> entries;

  std::size_t block_len() const { return left_marginal.block_len(); }

  /// True when row and column sums reproduce both marginals exactly.
  bool marginals_exact() const {
    std::vector<unsigned __int128> rows(left_marginal.support_size(), 0);
    std::vector<unsigned __int128> cols(right_marginal.support_size(), 0);
    unsigned __int128 sum = 0;
    for (const auto& e : entries) {
      if (e.left >= rows.size() || e.right >= cols.size()) return false;
      rows[e.left] += e.mass;
      cols[e.right] += e.mass;
      sum += e.mass;
    }
    if (sum != mass_total) return false;
    // rows[i] / mass_total == count_i / total  <=>  cross products agree.
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] * left_marginal.total() !=
          static_cast<unsigned __int128>(left_marginal.atoms()[i].count) *
              mass_total) {
        return false;
      }
    }
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j] * right_marginal.total() !=
          static_cast<unsigned __int128>(right_marginal.atoms()[j].count) *
              mass_total) {
        return false;
      }
    }
    return true;
  }
};

}  // namespace pinsker
