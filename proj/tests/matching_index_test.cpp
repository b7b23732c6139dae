#include <gtest/gtest.h>

#include <random>

#include "gapedit/matching_index.hpp"

using namespace gapedit;

namespace {

Text random_text(std::mt19937_64& rng, std::size_t n, unsigned sigma) {
  std::vector<Symbol> s(n);
  for (auto& c : s) c = static_cast<Symbol>(rng() % sigma);
  return Text(std::move(s), std::max(256u, sigma));
}

TreeConfig config(std::uint64_t n, std::uint64_t k, std::uint64_t seed) {
  TreeConfig c;
  c.shape = choose_shape(n);
  c.k = k;
  c.master_seed = Seed::from_u64(seed);
  return c;
}

struct CountingSource {
  const Text* t;
  std::int64_t start;
  std::size_t len;
  mutable std::size_t reads = 0;
  std::size_t size() const { return len; }
  Symbol operator[](std::size_t i) const {
    ++reads;
    return t->at(start + static_cast<std::int64_t>(i));
  }
};

}  // namespace

TEST(Arithmetic, PrimalityAgreesWithTrialDivision) {
  for (std::uint64_t n = 0; n < 20000; ++n) {
    bool p = n >= 2;
    for (std::uint64_t d = 2; d * d <= n && p; ++d) p = n % d != 0;
    ASSERT_EQ(is_prime(n), p) << n;
  }
  EXPECT_TRUE(is_prime((std::uint64_t{1} << 61) - 1));
  EXPECT_FALSE(is_prime(std::uint64_t{3215031751}));  // strong pseudoprime to bases 2, 3, 5, 7
  EXPECT_EQ(mulmod(std::uint64_t{1} << 62, 4, 1000000007), static_cast<std::uint64_t>((static_cast<unsigned __int128>(1) << 64) % 1000000007));
  EXPECT_EQ(powmod(3, 4, 100), 81u);
}

TEST(Arithmetic, ModulusRange) {
  for (std::uint64_t n : {2u, 16u, 256u, 4096u, 65536u, 1u << 20}) {
    const std::uint64_t p = fingerprint_modulus(n);
    EXPECT_TRUE(is_prime(p));
    EXPECT_GE(p, std::uint64_t{1} << 31);
    EXPECT_LE(p, (std::uint64_t{1} << 61) - 1);
    const long double n4 = static_cast<long double>(n) * n * n * n;
    if (n4 >= 0x1.0p31L && n4 < 0x1.0p61L) {
      EXPECT_LE(static_cast<long double>(p), n4);
      // largest prime not above n^4
      for (std::uint64_t q = p + 1; static_cast<long double>(q) <= n4 && q < p + 2000; ++q) EXPECT_FALSE(is_prime(q));
    }
  }
}

TEST(Fingerprint, EmptySampleIsZeroAndEqualSourcesCollide) {
  NodeHash h;
  const Text a = Text::from_bytes("hello");
  EXPECT_EQ(fingerprint(a, h, 1000003), 0u);
  const PrecisionTree tree(config(256, 4, 1));
  const NodeHashes hs(tree, 4.0);
  const Text b = Text::from_bytes("hello");
  for (std::uint64_t id = 0; id < 10; ++id)
    EXPECT_EQ(fingerprint(Window(a, 0, 5), hs[id], hs.modulus()), fingerprint(Window(b, 0, 5), hs[id], hs.modulus()));
}

TEST(Fingerprint, SentinelsCodeToTopOfField) {
  const std::uint64_t p = 1000003;
  EXPECT_EQ(symbol_code(kBottom, p), p - 1);
  EXPECT_EQ(symbol_code(kPad, p), p - 2);
  EXPECT_EQ(symbol_code(7, p), 7u);
}

TEST(Fingerprint, FarSourcesRarelyCollide) {
  // full sampling (rate 1), fresh coefficients each trial
  std::mt19937_64 rng(3);
  const std::size_t n = 256;
  int collisions = 0;
  const int trials = 10000;
  const Text a = random_text(rng, n, 4);
  for (int t = 0; t < trials; ++t) {
    std::vector<Symbol> s = materialize(a);
    for (std::size_t i = 0; i < n; i += 2) s[i] = (s[i] + 1) % 4;  // HD = n/2 > t/2 for t < n
    const Text b(std::move(s), 256);
    PrecisionNode v;
    v.range_len = n;
    const std::uint64_t p = fingerprint_modulus(n);
    const NodeHash h = make_node_hash(Seed::from_u64(static_cast<std::uint64_t>(t)), v, 1.0, p);
    collisions += fingerprint(a, h, p) == fingerprint(b, h, p);
  }
  EXPECT_LE(static_cast<double>(collisions) / trials, 2.0 / n);
}

TEST(MatchingIndex, SelfQueriesAreCloseWithSmallHamming) {
  std::mt19937_64 rng(11);
  const Text y = random_text(rng, 256, 4);
  const PrecisionTree tree(config(256, 4, 5));
  const Text yp = y.padded_to(tree.shape().n_padded);
  const ShiftSet s = shift_universe(4, tree.shape());
  const MatchingIndex m(yp, tree, s, 4.0);
  for (const PrecisionNode& v : tree.nodes()) {
    const auto r = m.query(v.id, Window(yp, static_cast<std::int64_t>(v.range_start), v.range_len));
    ASSERT_TRUE(r.close) << v.id;
    const auto hd = hamming(Window(yp, static_cast<std::int64_t>(v.range_start), v.range_len),
                            Window(yp, static_cast<std::int64_t>(v.range_start) + r.shift, v.range_len));
    EXPECT_LE(static_cast<double>(hd), v.tolerance / 2) << v.id;
  }
}

TEST(MatchingIndex, ExactMatchAtShiftThreeIsClose) {
  std::mt19937_64 rng(12);
  const Text y = random_text(rng, 512, 4);
  const PrecisionTree tree(config(512, 4, 6));
  const Text yp = y.padded_to(tree.shape().n_padded);
  const MatchingIndex m(yp, tree, shift_universe(4, tree.shape()), 4.0);
  for (const PrecisionNode& v : tree.nodes()) {
    const auto r = m.query(v.id, Window(yp, static_cast<std::int64_t>(v.range_start) + 3, v.range_len));
    EXPECT_TRUE(r.close) << v.id;
  }
}

TEST(MatchingIndex, RandomXOverLargeAlphabetIsFar) {
  std::mt19937_64 rng(13);
  const std::size_t n = 1024;
  const Text y = random_text(rng, n, 4);
  const PrecisionTree tree(config(n, 4, 7));
  const Text yp = y.padded_to(tree.shape().n_padded);
  const MatchingIndex m(yp, tree, shift_universe(4, tree.shape()), 4.0);
  std::size_t far = 0, total = 0;
  for (int t = 0; t < 20; ++t) {
    std::vector<Symbol> xs(tree.shape().n_padded);
    for (auto& c : xs) c = static_cast<Symbol>(100 + rng() % 100000);
    const Text x(std::move(xs), 200000);
    for (const PrecisionNode& v : tree.nodes()) {
      if (m.hashes()[v.id].sample.empty()) continue;  // nothing to test
      far += !m.query(v.id, Window(x, static_cast<std::int64_t>(v.range_start), v.range_len)).close;
      ++total;
    }
  }
  EXPECT_GE(static_cast<double>(far) / total, 1 - 2.0 / n);
}

TEST(MatchingIndex, QueryReadsOnlySampledPositions) {
  std::mt19937_64 rng(14);
  const Text y = random_text(rng, 1024, 4);
  const PrecisionTree tree(config(1024, 16, 8));
  const Text yp = y.padded_to(tree.shape().n_padded);
  const MatchingIndex m(yp, tree, shift_universe(16, tree.shape()), 4.0);
  for (std::uint64_t id : {std::uint64_t{0}, std::uint64_t{1}, std::uint64_t{5}}) {
    const PrecisionNode& v = tree.node(id);
    CountingSource src{&yp, static_cast<std::int64_t>(v.range_start), v.range_len};
    m.query(id, src);
    EXPECT_EQ(src.reads, m.hashes()[id].sample.size());
  }
}

TEST(MatchingIndex, TablesAreDeterministicAndSorted) {
  std::mt19937_64 rng(15);
  const Text y = random_text(rng, 300, 4);
  const PrecisionTree tree(config(300, 4, 9));
  const Text yp = y.padded_to(tree.shape().n_padded);
  const ShiftSet s = shift_universe(4, tree.shape());
  const MatchingIndex a(yp, tree, s, 4.0), b(yp, tree, s, 4.0);
  for (std::uint64_t id = 0; id < tree.size(); ++id) {
    const auto& ta = a.table(id);
    const auto& tb = b.table(id);
    ASSERT_EQ(ta.size(), tb.size());
    ASSERT_LE(ta.size(), s.size());
    for (std::size_t i = 0; i < ta.size(); ++i) {
      EXPECT_EQ(ta[i].fingerprint, tb[i].fingerprint);
      EXPECT_EQ(ta[i].shift, tb[i].shift);
      if (i) EXPECT_LT(ta[i - 1].fingerprint, ta[i].fingerprint);
    }
  }
}

// The single-sample shortcut must store exactly what the generic loop stores.
TEST(MatchingIndex, OccurrenceShortcutMatchesGenericLoop) {
  std::mt19937_64 rng(16);
  const Text y = random_text(rng, 2000, 3);
  const PrecisionTree tree(config(2000, 64, 10));
  const Text yp = y.padded_to(tree.shape().n_padded);
  const ShiftSet s = shift_universe(64, tree.shape());
  const NodeHashes hs(tree, 4.0);
  const SymbolOccurrences occ(yp);
  std::size_t checked = 0;
  for (const PrecisionNode& v : tree.nodes()) {
    if (hs[v.id].sample.size() != 1 || checked > 200) continue;
    const auto fast = MatchingIndex::build_table(yp, v, hs[v.id], s, hs.modulus(), &occ);
    const auto slow = MatchingIndex::build_table(yp, v, hs[v.id], s, hs.modulus(), nullptr);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      EXPECT_EQ(fast[i].fingerprint, slow[i].fingerprint);
      EXPECT_EQ(fast[i].shift, slow[i].shift);
    }
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(TwoSided, XFingerprintsEqualYAtShiftZero) {
  std::mt19937_64 rng(17);
  const Text y = random_text(rng, 256, 4);
  const PrecisionTree tree(config(256, 4, 11));
  const Text yp = y.padded_to(tree.shape().n_padded);
  const MatchingIndex m(yp, tree, shift_universe(4, tree.shape()), 4.0);
  const auto fx = x_fingerprints(yp, tree, m.hashes());
  ASSERT_EQ(fx.size(), tree.size());
  for (const PrecisionNode& v : tree.nodes()) {
    EXPECT_EQ(fx[v.id], fingerprint(Window(yp, static_cast<std::int64_t>(v.range_start), v.range_len), m.hashes()[v.id],
                                    m.modulus()));
    EXPECT_TRUE(m.lookup(v.id, fx[v.id]).close);
  }
  // independent of k: a different shift universe leaves the hashing state alone
  const MatchingIndex m2(yp, PrecisionTree(config(256, 4, 11)), shift_universe(8, tree.shape()), 4.0);
  EXPECT_EQ(x_fingerprints(yp, tree, m2.hashes()), fx);
}
