// Seeded generators for the two source processes: i.i.d. (Bernoulli) shifts
// and Ornstein's non-Bernoulli K-process built from recursive r-blocks.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pinsker/core.hpp"

namespace pinsker {

// ---------------------------------------------------------------------------
// Random numbers
//
// Counter-based splitmix64: draw k of a stream with key K is mix(K + k * gamma).
// Substreams are keyed by mixing the parent key with the substream index, so
// any child stream can be produced without touching its siblings.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct RngSeed {
  std::uint64_t seed = 0;

  RngSeed substream(std::uint64_t index) const {
    return RngSeed{splitmix64_mix(seed ^ splitmix64_mix(index + kGoldenGamma))};
  }
};

class CounterRng {
 public:
  explicit CounterRng(RngSeed seed) : key_(splitmix64_mix(seed.seed)) {}

  std::uint64_t next() { return splitmix64_mix(key_ + (++counter_) * kGoldenGamma); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on [lo, hi] by rejection, so the law is exact.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo;
    if (span == ~std::uint64_t{0}) return next();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range) - 1;
    std::uint64_t x;
    do {
      x = next();
    } while (x > limit);
    return lo + x % range;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Bernoulli shifts

struct BernoulliSpec {
  Alphabet alphabet = Alphabet::binary();
  std::vector<double> probs{0.5, 0.5};

  void validate() const {
    if (probs.size() != alphabet.size()) {
      throw Error(ErrorKind::kInvalidSpec, "one probability per symbol required");
    }
    double sum = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorKind::kInvalidSpec, "probabilities must be nonnegative");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw Error(ErrorKind::kInvalidSpec, "probabilities must sum to 1");
    }
  }
};

inline Word bernoulli_sample(const BernoulliSpec& spec, std::size_t len, RngSeed seed) {
  spec.validate();
  if (len == 0) throw Error(ErrorKind::kInvalidInput, "sample length must be positive");
  const std::size_t k = spec.probs.size();
  std::size_t last_positive = 0;
  for (std::size_t s = 0; s < k; ++s) {
    if (spec.probs[s] > 0.0) last_positive = s;
  }
  std::vector<double> cumulative(k, 1.0);
  double acc = 0.0;
  for (std::size_t s = 0; s < last_positive; ++s) {
    acc += spec.probs[s];
    cumulative[s] = acc;
  }
  CounterRng rng(seed);
  std::vector<Symbol> data(len);
  for (auto& out : data) {
    const double u = rng.uniform01();
    std::size_t s = 0;
    while (s < last_positive && !(u < cumulative[s])) ++s;
    out = static_cast<Symbol>(s);
  }
  return Word(spec.alphabet, std::move(data));
}

// ---------------------------------------------------------------------------
// Ornstein r-blocks
//
// A 1-block is f^k 0^h0 e^(f(1)-k). For r >= 2 an r-block is
//   f^k s^(1 s(r)) B_1 s^(2 s(r)) B_2 ... B_{2^r} s^((2^r+1) s(r)) e^(f(r)-k)
// with independent (r-1)-blocks B_i and k uniform on [1, f(r)-1].

namespace ornstein_symbols {
inline constexpr Symbol kZero = 0;
inline constexpr Symbol kE = 1;
inline constexpr Symbol kF = 2;
inline constexpr Symbol kS = 3;
}  // namespace ornstein_symbols

struct OrnsteinSpec {
  std::uint64_t h0 = 4;
  std::vector<std::uint64_t> f;  // f[r-1] = f(r)
  std::vector<std::uint64_t> s;  // s[r-1] = s(r); s(1) is unused
  std::size_t r_max = 0;

  /// h0 = 4, f(r) = 2r + 2, s(r) = 2^r, r_max = 6.
  static OrnsteinSpec defaults() {
    OrnsteinSpec spec;
    spec.h0 = 4;
    spec.r_max = 6;
    for (std::size_t r = 1; r <= spec.r_max; ++r) {
      spec.f.push_back(2 * r + 2);
      spec.s.push_back(std::uint64_t{1} << r);
    }
    return spec;
  }

  std::uint64_t f_at(std::size_t r) const { return f.at(r - 1); }
  std::uint64_t s_at(std::size_t r) const { return s.at(r - 1); }

  void validate() const {
    if (h0 < 1) throw Error(ErrorKind::kInvalidSpec, "h0 must be positive");
    if (r_max < 1) throw Error(ErrorKind::kInvalidSpec, "r_max must be >= 1");
    if (r_max > 40) throw Error(ErrorKind::kInvalidSpec, "r_max too large");
    if (f.size() != r_max || s.size() != r_max) {
      throw Error(ErrorKind::kInvalidSpec, "f and s must have r_max entries");
    }
    for (std::size_t r = 1; r <= r_max; ++r) {
      if (f_at(r) < 2) throw Error(ErrorKind::kInvalidSpec, "f(r) must be >= 2");
      if (s_at(r) < 1) throw Error(ErrorKind::kInvalidSpec, "s(r) must be >= 1");
    }
  }
};

namespace detail {

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error(ErrorKind::kTooLarge, "block height overflows 64 bits");
  }
  return out;
}

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorKind::kTooLarge, "block height overflows 64 bits");
  }
  return out;
}

}  // namespace detail

/// h(0) = h0, h(1) = h0 + f(1), and for r >= 2
/// h(r) = f(r) + 2^r h(r-1) + s(r) (2^r + 1)(2^r + 2) / 2.
inline std::uint64_t ornstein_height(const OrnsteinSpec& spec, std::size_t r) {
  spec.validate();
  if (r > spec.r_max) {
    throw Error(ErrorKind::kBadRank,
                "rank " + std::to_string(r) + " exceeds r_max " +
                    std::to_string(spec.r_max));
  }
  using detail::checked_add;
  using detail::checked_mul;
  std::uint64_t h = spec.h0;
  for (std::size_t q = 1; q <= r; ++q) {
    if (q == 1) {
      h = checked_add(h, spec.f_at(1));
      continue;
    }
    const std::uint64_t children = std::uint64_t{1} << q;
    // s-run lengths are i s(q) for i = 1 .. 2^q + 1.
    const std::uint64_t s_units = checked_mul(children + 1, children + 2) / 2;
    h = checked_add(checked_add(spec.f_at(q), checked_mul(children, h)),
                    checked_mul(spec.s_at(q), s_units));
  }
  return h;
}

namespace detail {

inline Symbol* fill_run(Symbol* out, Symbol symbol, std::uint64_t count) {
  std::fill(out, out + count, symbol);
  return out + count;
}

inline Symbol* fill_ornstein_block(const OrnsteinSpec& spec, std::size_t r,
                                   RngSeed seed, Symbol* out) {
  namespace os = ornstein_symbols;
  CounterRng rng(seed);
  const std::uint64_t fr = spec.f_at(r);
  const std::uint64_t k = rng.uniform_int(1, fr - 1);
  out = fill_run(out, os::kF, k);
  if (r == 1) {
    out = fill_run(out, os::kZero, spec.h0);
  } else {
    const std::uint64_t children = std::uint64_t{1} << r;
    const std::uint64_t sr = spec.s_at(r);
    for (std::uint64_t i = 1; i <= children; ++i) {
      out = fill_run(out, os::kS, i * sr);
      out = fill_ornstein_block(spec, r - 1, seed.substream(i), out);
    }
    out = fill_run(out, os::kS, (children + 1) * sr);
  }
  return fill_run(out, os::kE, fr - k);
}

}  // namespace detail

/// Random r-block. Child blocks draw from substreams 1..2^r of `seed`.
inline Word ornstein_block(const OrnsteinSpec& spec, std::size_t r, RngSeed seed) {
  if (r < 1) throw Error(ErrorKind::kBadRank, "block rank must be >= 1");
  const std::uint64_t h = ornstein_height(spec, r);
  if (h > (std::uint64_t{1} << 36)) {
    throw Error(ErrorKind::kTooLarge, "block of height " + std::to_string(h));
  }
  std::vector<Symbol> data(h);
  Symbol* end = detail::fill_ornstein_block(spec, r, seed, data.data());
  if (static_cast<std::uint64_t>(end - data.data()) != h) {
    throw Error(ErrorKind::kInvalidSpec, "generated block length mismatch");
  }
  return Word(Alphabet::ornstein(), std::move(data));
}

struct OrnsteinWindow {
  Word word;
  std::uint64_t offset;
};

/// One r_max-block from substream 0 of `seed`, cut at a uniform offset drawn
/// from substream 1.
inline OrnsteinWindow ornstein_sample_window(const OrnsteinSpec& spec, std::size_t len,
                                             RngSeed seed) {
  const std::uint64_t h = ornstein_height(spec, spec.r_max);
  if (len == 0) throw Error(ErrorKind::kInvalidInput, "sample length must be positive");
  if (len > h) {
    throw Error(ErrorKind::kSampleTooLong,
                "length " + std::to_string(len) + " exceeds h(r_max) = " +
                    std::to_string(h));
  }
  Word block = ornstein_block(spec, spec.r_max, seed.substream(0));
  CounterRng offset_rng(seed.substream(1));
  const std::uint64_t offset = offset_rng.uniform_int(0, h - len);
  if (offset == 0 && len == h) return {std::move(block), 0};
  return {block.subword(offset, len), offset};
}

inline Word ornstein_sample(const OrnsteinSpec& spec, std::size_t len, RngSeed seed) {
  return ornstein_sample_window(spec, len, seed).word;
}

/// Parses `w` as an r-block and reports the first grammar violation, if any.
inline std::optional<std::string> ornstein_grammar_error(const OrnsteinSpec& spec,
                                                         std::size_t r, const Word& w) {
  namespace os = ornstein_symbols;
  if (!(w.alphabet() == Alphabet::ornstein())) return "word is not over 0efs";
  const auto data = w.symbols();
  std::size_t pos = 0;
  std::optional<std::string> error;

  auto run_length = [&](Symbol sym) {
    std::size_t n = 0;
    while (pos + n < data.size() && data[pos + n] == sym) ++n;
    return n;
  };
  auto expect_run = [&](Symbol sym, std::uint64_t len, const char* what) {
    if (error) return;
    for (std::uint64_t i = 0; i < len; ++i) {
      if (pos >= data.size() || data[pos] != sym) {
        error = std::string(what) + " broken at position " + std::to_string(pos);
        return;
      }
      ++pos;
    }
  };

  std::function<void(std::size_t)> parse = [&](std::size_t q) {
    if (error) return;
    const std::uint64_t fq = spec.f_at(q);
    const std::size_t k = run_length(os::kF);
    if (k < 1 || k > fq - 1) {
      error = "f-run of length " + std::to_string(k) + " at position " +
              std::to_string(pos) + " for rank " + std::to_string(q);
      return;
    }
    pos += k;
    if (q == 1) {
      expect_run(os::kZero, spec.h0, "0-run");
    } else {
      const std::uint64_t children = std::uint64_t{1} << q;
      for (std::uint64_t i = 1; i <= children && !error; ++i) {
        expect_run(os::kS, i * spec.s_at(q), "s-run");
        parse(q - 1);
      }
      expect_run(os::kS, (children + 1) * spec.s_at(q), "closing s-run");
    }
    expect_run(os::kE, fq - k, "e-run");
  };
  parse(r);
  if (!error && pos != data.size()) {
    error = "trailing symbols after position " + std::to_string(pos);
  }
  return error;
}

}  // namespace pinsker
