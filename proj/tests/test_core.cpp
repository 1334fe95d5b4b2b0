#include <gtest/gtest.h>

#include <map>
#include <random>
#include <string>

#include "pinsker/core.hpp"

using namespace pinsker;

namespace {

Word bin(const std::string& s) { return parse_word(s, Alphabet::binary()); }

// Window counts by direct substring enumeration.
std::map<std::string, std::uint64_t> naive_counts(const std::string& w, std::size_t l) {
  std::map<std::string, std::uint64_t> out;
  for (std::size_t t = 0; t + l <= w.size(); ++t) ++out[w.substr(t, l)];
  return out;
}

std::map<std::string, std::uint64_t> as_map(const BlockDist& d) {
  std::map<std::string, std::uint64_t> out;
  for (std::size_t i = 0; i < d.support_size(); ++i) out[d.atom_string(i)] = d.atoms()[i].count;
  return out;
}

std::string random_text(std::mt19937_64& rng, const std::string& symbols, std::size_t len) {
  std::uniform_int_distribution<std::size_t> pick(0, symbols.size() - 1);
  std::string s(len, '0');
  for (auto& c : s) c = symbols[pick(rng)];
  return s;
}

}  // namespace

TEST(Alphabet, Registry) {
  EXPECT_EQ(Alphabet::binary().symbols(), "01");
  EXPECT_EQ(Alphabet::ornstein().symbols(), "0efs");
  EXPECT_EQ(Alphabet::ornstein().zero(), 0);
  EXPECT_EQ(Alphabet::binary().bits_per_symbol(), 1u);
  EXPECT_EQ(Alphabet::ornstein().bits_per_symbol(), 2u);
  EXPECT_EQ(Alphabet::from_name("binary"), Alphabet::binary());
  EXPECT_EQ(Alphabet::from_name("0efs"), Alphabet::ornstein());
}

TEST(Alphabet, RejectsInvalid) {
  EXPECT_THROW(Alphabet("", 0), Error);
  EXPECT_THROW(Alphabet("001", 0), Error);
  EXPECT_THROW(Alphabet("a1", 0), Error);
  EXPECT_THROW(Alphabet("01", 2), Error);
}

TEST(ParseWord, Examples) {
  const Word w = bin("0110");
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(std::vector<Symbol>(w.symbols().begin(), w.symbols().end()),
            (std::vector<Symbol>{0, 1, 1, 0}));
  EXPECT_TRUE(bin("").empty());
  const Word o = parse_word("f00ee", Alphabet::ornstein());
  EXPECT_EQ(o.size(), 5u);
  EXPECT_EQ(std::vector<Symbol>(o.symbols().begin(), o.symbols().end()),
            (std::vector<Symbol>{2, 0, 0, 1, 1}));
}

TEST(ParseWord, UnknownSymbolReportsPosition) {
  try {
    parse_word("01x1", Alphabet::binary());
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownSymbol);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("x"), std::string::npos);
  }
}

TEST(ParseWord, RenderRoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::string text = random_text(rng, "0efs", trial);
    EXPECT_EQ(render(parse_word(text, Alphabet::ornstein())), text);
  }
}

TEST(Word, Subword) {
  const Word w = bin("110111");
  EXPECT_EQ(w.subword(2, 3).str(), "011");
  EXPECT_THROW(w.subword(4, 3), Error);
}

TEST(BlockCodes, EncodeDecodeAndMismatches) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::string a = random_text(rng, "0efs", 1 + trial % 31);
    const std::string b = random_text(rng, "0efs", a.size());
    const Word wa = parse_word(a, Alphabet::ornstein());
    const Word wb = parse_word(b, Alphabet::ornstein());
    const BlockCode ca = encode_block(wa.symbols(), 2);
    const BlockCode cb = encode_block(wb.symbols(), 2);
    EXPECT_EQ(decode_block(ca, a.size(), 2), std::vector<Symbol>(wa.symbols().begin(), wa.symbols().end()));
    unsigned diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a[i] != b[i];
    EXPECT_EQ(block_mismatches(ca, cb, 2), diff);
  }
}

TEST(BlockCodes, TooLongForCode) {
  EXPECT_NO_THROW(check_codable(Alphabet::binary(), 64));
  EXPECT_THROW(check_codable(Alphabet::binary(), 65), Error);
  EXPECT_THROW(check_codable(Alphabet::ornstein(), 33), Error);
}

TEST(EmpiricalBlockDist, Examples) {
  EXPECT_EQ(as_map(empirical_block_dist(bin("0101"), 2)),
            (std::map<std::string, std::uint64_t>{{"01", 2}, {"10", 1}}));
  const BlockDist c = empirical_block_dist(bin("0000"), 1);
  EXPECT_EQ(as_map(c), (std::map<std::string, std::uint64_t>{{"0", 4}}));
  EXPECT_EQ(c.weight(0), 1.0);
  const BlockDist d = empirical_block_dist(bin("110111"), 3);
  EXPECT_EQ(d.total(), 4u);
  EXPECT_EQ(as_map(d), (std::map<std::string, std::uint64_t>{
                           {"110", 1}, {"101", 1}, {"011", 1}, {"111", 1}}));
}

TEST(EmpiricalBlockDist, Errors) {
  try {
    empirical_block_dist(bin("0101"), 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kBlockTooLong);
  }
}

TEST(EmpiricalBlockDist, MatchesSubstringCountsAndSumsExactly) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string text = random_text(rng, trial % 2 ? "01" : "0efs", 30 + trial);
    const Word w = parse_word(text, trial % 2 ? Alphabet::binary() : Alphabet::ornstein());
    const std::size_t l = 1 + trial % 12;
    const BlockDist d = empirical_block_dist(w, l);
    EXPECT_EQ(as_map(d), naive_counts(text, l));
    std::uint64_t sum = 0;
    for (const auto& a : d.atoms()) sum += a.count;
    EXPECT_EQ(sum, d.total());
    EXPECT_EQ(d.total(), text.size() - l + 1);
  }
}

TEST(EmpiricalBlockDist, SparseCountingPath) {
  // 2 bits x 16 symbols exceeds the dense table width.
  std::mt19937_64 rng(5);
  const std::string text = random_text(rng, "0efs", 3000);
  const BlockDist d = empirical_block_dist(parse_word(text, Alphabet::ornstein()), 16);
  EXPECT_EQ(as_map(d), naive_counts(text, 16));
}

TEST(EmpiricalBlockDist, WorkerCountDoesNotChangeResult) {
  std::mt19937_64 rng(9);
  const Word w = bin(random_text(rng, "01", 200000));
  for (std::size_t l : {3u, 12u, 30u}) {
    const BlockDist one = empirical_block_dist(w, l, 1);
    for (std::size_t workers : {2u, 3u, 8u}) EXPECT_EQ(empirical_block_dist(w, l, workers), one);
  }
}

TEST(EmpiricalBlockDist, PrefixMarginalBoundaryEffect) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::string text = random_text(rng, "0efs", 10 + trial);
    const Word w = parse_word(text, Alphabet::ornstein());
    const std::size_t l = 1 + trial % 6;
    const double tv = total_variation(prefix_marginal(empirical_block_dist(w, l + 1), l),
                                      empirical_block_dist(w, l));
    EXPECT_LE(tv, 2.0 / static_cast<double>(w.size() - l + 1) + 1e-15);
  }
}

TEST(BlockDist, FromWordsMergesAndValidates) {
  const auto d = BlockDist::from_words(Alphabet::binary(), 2, {{"01", 2}, {"10", 1}, {"01", 3}, {"11", 0}});
  EXPECT_EQ(as_map(d), (std::map<std::string, std::uint64_t>{{"01", 5}, {"10", 1}}));
  EXPECT_EQ(d.count_of(bin("01")), 5u);
  EXPECT_EQ(d.count_of(bin("00")), 0u);
  EXPECT_THROW(BlockDist::from_words(Alphabet::binary(), 2, {{"011", 1}}), Error);
  EXPECT_THROW(BlockDist::from_words(Alphabet::binary(), 2, {{"01", 0}}), Error);
}

TEST(ProductBlockDist, ExactIidLaw) {
  const BlockDist d = product_block_dist(Alphabet::binary(), {1, 3}, 3);
  EXPECT_EQ(d.total(), 64u);
  EXPECT_EQ(d.count_of(bin("111")), 27u);
  EXPECT_EQ(d.count_of(bin("010")), 3u);
  EXPECT_EQ(d.count_of(bin("000")), 1u);
  EXPECT_EQ(prefix_marginal(d, 1).count_of(bin("1")) * 4, prefix_marginal(d, 1).total() * 3);
}

TEST(Coupling, MarginalCheck) {
  const auto a = BlockDist::from_words(Alphabet::binary(), 1, {{"0", 1}, {"1", 1}});
  const auto b = BlockDist::from_words(Alphabet::binary(), 1, {{"0", 1}, {"1", 3}});
  Coupling good{a, b, 4, {{0, 0, 1}, {0, 1, 1}, {1, 1, 2}}};
  EXPECT_TRUE(good.marginals_exact());
  Coupling bad{a, b, 4, {{0, 0, 2}, {1, 1, 2}}};
  EXPECT_FALSE(bad.marginals_exact());
}

TEST(ParallelFor, VisitsEveryIndexOnceAndPropagatesErrors) {
  std::vector<int> hits(1000, 0);
  detail::parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(detail::parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorKind::kInvalidInput, "boom");
               }),
               Error);
}
