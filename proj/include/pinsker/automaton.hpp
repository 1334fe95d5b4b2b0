// Erosion cellular automaton with neighborhood {0, 1}: a symbol survives only
// when it equals its right neighbour, otherwise it becomes the zero symbol.
// On finite words every application shortens the word by one (no wraparound).

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "pinsker/core.hpp"

namespace pinsker {

/// Two-argument local rule over an alphabet, stored as a full table.
class LocalRule {
 public:
  /// Equality-else-zero rule.
  explicit LocalRule(const Alphabet& alphabet)
      : alphabet_size_(alphabet.size()),
        table_(alphabet.size() * alphabet.size(), alphabet.zero()) {
    for (std::size_t a = 0; a < alphabet_size_; ++a) {
      table_[a * alphabet_size_ + a] = static_cast<Symbol>(a);
    }
    is_default_ = true;
  }

  LocalRule(const Alphabet& alphabet, std::vector<Symbol> table)
      : alphabet_size_(alphabet.size()), table_(std::move(table)) {
    if (table_.size() != alphabet_size_ * alphabet_size_) {
      throw Error(ErrorKind::kInvalidSpec, "rule table must be |A| x |A|");
    }
    for (Symbol s : table_) {
      if (s >= alphabet_size_) {
        throw Error(ErrorKind::kInvalidSpec, "rule output outside alphabet");
      }
    }
    is_default_ = table_ == LocalRule(alphabet).table_;
  }

  Symbol operator()(Symbol left, Symbol right) const {
    return table_[left * alphabet_size_ + right];
  }

  bool is_default() const noexcept { return is_default_; }

 private:
  std::size_t alphabet_size_;
  std::vector<Symbol> table_;
  bool is_default_ = false;
};

inline Word apply_once(const Word& w, const LocalRule& rule) {
  if (w.empty()) throw Error(ErrorKind::kEmptyWord, "apply_once on empty word");
  std::vector<Symbol> out(w.size() - 1);
  const auto in = w.symbols();
  for (std::size_t i = 0; i + 1 < in.size(); ++i) out[i] = rule(in[i], in[i + 1]);
  return Word(w.alphabet(), std::move(out));
}

inline Word apply_once(const Word& w) { return apply_once(w, LocalRule(w.alphabet())); }

/// n-fold composition of apply_once; output length is length(w) - n.
inline Word apply_iter(const Word& w, std::size_t n, const LocalRule& rule) {
  if (n > w.size()) {
    throw Error(ErrorKind::kWordTooShort,
                std::to_string(n) + " iterations on a word of length " +
                    std::to_string(w.size()));
  }
  std::vector<Symbol> buf(w.data());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i + 1 < buf.size(); ++i) buf[i] = rule(buf[i], buf[i + 1]);
    buf.pop_back();
  }
  return Word(w.alphabet(), std::move(buf));
}

inline Word apply_iter(const Word& w, std::size_t n) {
  return apply_iter(w, n, LocalRule(w.alphabet()));
}

/// Closed form of apply_iter under the default rule: out[i] = a != 0 exactly
/// when w[i..i+n] is the constant run a^(n+1). One pass over the runs of w.
inline std::vector<Symbol> erode(std::span<const Symbol> in, std::size_t n,
                                 Symbol zero) {
  if (n > in.size()) {
    throw Error(ErrorKind::kWordTooShort,
                std::to_string(n) + " iterations on a word of length " +
                    std::to_string(in.size()));
  }
  std::vector<Symbol> out(in.size() - n, zero);
  std::size_t start = 0;
  while (start < in.size()) {
    std::size_t end = start + 1;
    while (end < in.size() && in[end] == in[start]) ++end;
    // A run [start, end) of symbol a keeps a on [start, end - n).
    if (in[start] != zero && end - start > n) {
      std::fill(out.begin() + static_cast<std::ptrdiff_t>(start),
                out.begin() + static_cast<std::ptrdiff_t>(end - n), in[start]);
    }
    start = end;
  }
  return out;
}

inline Word apply_iter_fast(const Word& w, std::size_t n) {
  return Word(w.alphabet(), erode(w.symbols(), n, w.alphabet().zero()));
}

/// All words apply_iter(u, n) for u ranging over A^(block_len + n), by brute
/// force with the plain iterated rule.
inline std::set<std::string> reachable_blocks(std::size_t n, std::size_t block_len,
                                              const Alphabet& alphabet) {
  constexpr double kMaxEnumeration = double(1 << 24);
  const std::size_t len = block_len + n;
  double states = 1.0;
  for (std::size_t i = 0; i < len; ++i) {
    states *= static_cast<double>(alphabet.size());
    if (states > kMaxEnumeration) {
      throw Error(ErrorKind::kTooLarge,
                  "enumeration of A^" + std::to_string(len) + " exceeds 2^24");
    }
  }
  if (block_len == 0) {
    throw Error(ErrorKind::kInvalidInput, "block length must be positive");
  }
  const auto total = static_cast<std::uint64_t>(states);
  const LocalRule rule(alphabet);
  std::set<std::string> out;
  std::vector<Symbol> u(len, 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    std::uint64_t rest = k;
    for (std::size_t i = len; i-- > 0;) {
      u[i] = static_cast<Symbol>(rest % alphabet.size());
      rest /= alphabet.size();
    }
    std::vector<Symbol> img = u;
    for (std::size_t step = 0; step < n; ++step) {
      for (std::size_t i = 0; i + 1 < img.size(); ++i) img[i] = rule(img[i], img[i + 1]);
      img.pop_back();
    }
    std::string s(img.size(), '\0');
    for (std::size_t i = 0; i < img.size(); ++i) s[i] = alphabet.symbol(img[i]);
    out.insert(std::move(s));
  }
  return out;
}

}  // namespace pinsker
