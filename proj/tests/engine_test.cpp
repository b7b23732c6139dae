#include <gtest/gtest.h>

#include <random>

#include "gapedit/engine.hpp"
#include "gapedit/generators.hpp"
#include "gapedit/harness.hpp"

using namespace gapedit;

namespace {

std::string letters(std::mt19937_64& rng, std::size_t n, unsigned sigma) {
  std::string s(n, 'a');
  for (auto& c : s) c = static_cast<char>('a' + rng() % sigma);
  return s;
}

EngineConfig small_config(std::uint64_t k, double kappa, std::uint32_t reps, std::uint64_t seed = 1) {
  EngineConfig c;
  c.k = k;
  c.kappa = kappa;
  c.reps = reps;
  c.seed = Seed::from_u64(seed);
  return c;
}

QueryOptions all_reps() {
  QueryOptions o;
  o.early_stop = false;
  return o;
}

}  // namespace

TEST(Engine, IdenticalStringsAreCloseWithAllVotes) {
  std::mt19937_64 rng(1);
  const Text y = Text::from_bytes(letters(rng, 1000, 4));
  const YIndex yi = preprocess_y(y, small_config(4, 8, 7));
  const QueryResult r = gap_query(y, yi, all_reps());
  EXPECT_EQ(r.verdict.decision, Decision::close);
  EXPECT_EQ(r.verdict.close_votes, 7u);
  EXPECT_EQ(r.verdict.estimate, 0.0);
}

TEST(Engine, RandomPairIsFar) {
  std::mt19937_64 rng(2);
  const std::size_t n = 2048;
  const EngineConfig cfg = small_config(2, 8, 5);  // K = 16, n >= 64 K
  const Text y = Text::from_bytes(letters(rng, n, 4)), x = Text::from_bytes(letters(rng, n, 4));
  ASSERT_FALSE(bounded_edit_distance(x, y, static_cast<std::size_t>(cfg.threshold())));
  EXPECT_EQ(gap_query(x, preprocess_y(y, cfg)).verdict.decision, Decision::far);
}

TEST(Engine, PlantedEditsAreClose) {
  std::mt19937_64 rng(3);
  const std::string ys = letters(rng, 1024, 4);
  const YIndex yi = preprocess_y(Text::from_bytes(ys), small_config(4, 64, 9));
  int close = 0;
  for (int t = 0; t < 20; ++t) {
    const std::string xs = plant_edits(ys, 4, 4, Seed::from_u64(100 + t));
    ASSERT_LE(*bounded_edit_distance(Text::from_bytes(xs), Text::from_bytes(ys), 4), 4u);
    close += gap_query(Text::from_bytes(xs), yi).verdict.decision == Decision::close;
  }
  EXPECT_EQ(close, 20);
}

TEST(Engine, LeafWithoutMatchIsExact) {
  // Y has no 'z': the leaf over the substituted position fails matching and
  // computes single-character distances, all 1 (BOTTOM included)
  const std::string ys(64, 'a');
  std::string xs = ys;
  xs[10] = 'z';
  EngineConfig cfg = small_config(1, 100, 1);
  cfg.branching = 4;
  const YIndex yi = preprocess_y(Text::from_bytes(ys), cfg);
  const Text x = Text::from_bytes(xs);
  OneSidedX access(x, yi.header.shape.n_padded);
  RepetitionRunner runner(yi, 0, access, 1e12);
  const PrecisionTree& tree = yi.reps[0].tree;
  const PrecisionNode& leaf = tree.node(tree.shape().level_offset(tree.shape().depth) + 10);
  const NodeEstimate e = runner.approx_node(leaf);
  EXPECT_EQ(runner.stats().leaf_hits, 1u);
  for (double v : e.values) EXPECT_EQ(v, 1.0);
}

TEST(Engine, PruneFailsOnDisjointAlphabet) {
  std::mt19937_64 rng(4);
  const std::string ys = letters(rng, 512, 4);
  std::string xs(512, 'Z');
  const YIndex yi = preprocess_y(Text::from_bytes(ys), small_config(4, 8, 1));
  const Text x = Text::from_bytes(xs);
  OneSidedX access(x, yi.header.shape.n_padded);
  RepetitionRunner runner(yi, 0, access, 1e12);
  for (const PrecisionNode& v : yi.reps[0].tree.nodes()) {
    if (yi.reps[0].matching.hashes()[v.id].sample.empty()) continue;
    if (v.range_start + v.range_len > 512) continue;  // the shared PAD tail matches
    EXPECT_FALSE(runner.prune_node(v).has_value());
  }
}

TEST(Engine, PruneSucceedsOnExactMatch) {
  std::mt19937_64 rng(5);
  const Text y = Text::from_bytes(letters(rng, 512, 4));
  const YIndex yi = preprocess_y(y, small_config(4, 8, 1));
  OneSidedX access(y, yi.header.shape.n_padded);
  RepetitionRunner runner(yi, 0, access, 1e12);
  for (const PrecisionNode& v : yi.reps[0].tree.nodes()) {
    const auto e = runner.prune_node(v);
    ASSERT_TRUE(e.has_value());
    EXPECT_LE(e->at(0), v.tolerance);
  }
}

TEST(Engine, OneAndTwoSidedAgree) {
  std::mt19937_64 rng(6);
  const std::string ys = letters(rng, 800, 4);
  const std::string xs = plant_edits(ys, 6, 4, Seed::from_u64(7));
  EngineConfig cfg = small_config(8, 16, 5);
  const YIndex yi = preprocess_y(Text::from_bytes(ys), cfg);
  cfg.nominal_length = ys.size();
  const XIndex xi = preprocess_x(Text::from_bytes(xs), cfg);
  const QueryResult one = gap_query(Text::from_bytes(xs), yi, all_reps());
  const QueryResult two = gap_query(xi, yi, all_reps());
  ASSERT_EQ(one.repetitions.size(), two.repetitions.size());
  for (std::size_t r = 0; r < one.repetitions.size(); ++r)
    EXPECT_EQ(one.repetitions[r].estimate, two.repetitions[r].estimate);
  EXPECT_GT(one.stats.x_reads, 0u);
  EXPECT_EQ(two.stats.x_reads, 0u);
  EXPECT_EQ(two.stats.y_reads, 0u);
  EXPECT_EQ(one.stats.y_reads, 0u);
}

TEST(Engine, MismatchedIndexesNameTheField) {
  std::mt19937_64 rng(7);
  const Text y = Text::from_bytes(letters(rng, 300, 4));
  const YIndex yi = preprocess_y(y, small_config(4, 8, 3, 1));
  const XIndex xi = preprocess_x(y, small_config(4, 8, 3, 2));
  try {
    gap_query(xi, yi);
    FAIL() << "expected a usage error";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }
  const XIndex xk = preprocess_x(y, small_config(5, 8, 3, 1));
  EXPECT_THROW(gap_query(xk, yi), UsageError);
}

TEST(Engine, LengthGapShortcut) {
  std::mt19937_64 rng(8);
  const Text y = Text::from_bytes(letters(rng, 600, 4));
  const YIndex yi = preprocess_y(y, small_config(2, 4, 3));
  const QueryResult r = gap_query(Text::from_bytes(letters(rng, 500, 4)), yi);
  EXPECT_TRUE(r.verdict.length_shortcut);
  EXPECT_EQ(r.verdict.decision, Decision::far);
  EXPECT_EQ(r.stats.x_reads, 0u);
}

TEST(Engine, BudgetExhaustionVotesFar) {
  std::mt19937_64 rng(9);
  const Text y = Text::from_bytes(letters(rng, 600, 4));
  const YIndex yi = preprocess_y(y, small_config(4, 1000, 3));
  QueryOptions o = all_reps();
  o.budget = 5;
  const QueryResult r = gap_query(Text::from_bytes(std::string(y.size(), 'a')), yi, o);
  EXPECT_TRUE(r.verdict.timed_out);
  EXPECT_EQ(r.verdict.decision, Decision::far);
  EXPECT_EQ(r.verdict.far_votes, 3u);
}

TEST(Engine, QueriesAreDeterministic) {
  std::mt19937_64 rng(10);
  const std::string ys = letters(rng, 700, 4);
  const YIndex a = preprocess_y(Text::from_bytes(ys), small_config(4, 8, 3, 9));
  const YIndex b = preprocess_y(Text::from_bytes(ys), small_config(4, 8, 3, 9));
  const Text x = Text::from_bytes(plant_edits(ys, 4, 4, Seed::from_u64(1)));
  const QueryResult ra = gap_query(x, a, all_reps()), rb = gap_query(x, b, all_reps());
  for (std::size_t r = 0; r < ra.repetitions.size(); ++r)
    EXPECT_EQ(ra.repetitions[r].estimate, rb.repetitions[r].estimate);
  EXPECT_EQ(ra.stats.x_reads, rb.stats.x_reads);
}

TEST(Engine, StatsMerge) {
  QueryStats a, b;
  a.x_reads = 3;
  a.operations = 10;
  b.x_reads = 4;
  b.prune_fails = 2;
  a += b;
  EXPECT_EQ(a.x_reads, 7u);
  EXPECT_EQ(a.prune_fails, 2u);
  EXPECT_EQ(a.operations, 10u);
}

// Median over seeds of the root estimate grows with the number of edits.
TEST(Engine, MedianEstimateMonotoneInEdits) {
  std::mt19937_64 rng(11);
  const std::string ys = letters(rng, 1024, 4);
  const std::uint64_t steps[] = {0, 4, 16, 64};
  std::vector<std::vector<double>> est(4);
  std::vector<std::string> xs(4);
  xs[0] = ys;
  for (int i = 1; i < 4; ++i) xs[i] = plant_edits(xs[i - 1], steps[i] - steps[i - 1], 4, Seed::from_u64(50 + i));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    EngineConfig cfg = small_config(16, 8, 1, seed);
    cfg.nominal_length = 1024;
    const YIndex yi = preprocess_y(Text::from_bytes(ys), cfg);
    for (int i = 0; i < 4; ++i) est[i].push_back(gap_query(Text::from_bytes(xs[i]), yi, all_reps()).repetitions[0].estimate);
  }
  for (int i = 1; i < 4; ++i) EXPECT_LE(median_of(est[i - 1]), median_of(est[i])) << i;
}

TEST(Baseline, IdenticalIsZeroAndSubstitutionIsPositive) {
  std::mt19937_64 rng(12);
  const std::string ys = letters(rng, 200, 4);
  const Text y = Text::from_bytes(ys);
  const TreeShape sh = choose_shape(y.size() + 2);
  const ShiftSet s = shift_universe(2, sh);
  EXPECT_EQ(baseline_estimate(y, y, sh, s)[s.rank(0)], 0.0);
  std::string xs = ys;
  xs[77] = xs[77] == 'a' ? 'b' : 'a';
  EXPECT_GE(baseline_estimate(Text::from_bytes(xs), y, sh, s)[s.rank(0)], 1.0);
  EXPECT_THROW(baseline_estimate(y, y, choose_shape(5000), s), UsageError);
}

// Every shift vector upper-bounds ED, so with exact leaves the recursion never
// drops below the true distance.
TEST(Baseline, NeverBelowExactDistance) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 60; ++t) {
    const std::string ys = letters(rng, 40 + rng() % 90, 3);
    const std::string xs = plant_edits(ys, rng() % 12, 3, Seed::from_u64(t));
    const Text x = Text::from_bytes(xs), y = Text::from_bytes(ys);
    const std::uint64_t k = 4;
    const TreeShape sh = choose_shape(std::max(x.size(), y.size()) + k);
    const ShiftSet s = shift_universe(k, sh);
    EXPECT_GE(baseline_estimate(x, y, sh, s)[s.rank(0)], static_cast<double>(edit_distance(x, y)));
  }
}

// Close (ED <= k) versus far (ED >= 4 theta) at n <= 512: the simple
// recombination, the full algorithm and the exact DP give the same verdicts.
TEST(Baseline, VerdictsAgreeWithFullAlgorithmAndDp) {
  std::mt19937_64 rng(14);
  const std::uint64_t k = 2;
  const double kappa = 32, theta = kappa * k;
  for (int t = 0; t < 6; ++t) {
    const std::string ys = letters(rng, 480, 4);
    const Text y = Text::from_bytes(ys);
    EngineConfig cfg = small_config(k, kappa, 5, t);
    const YIndex yi = preprocess_y(y, cfg);
    const TreeShape sh = yi.header.shape;
    const ShiftSet s = header_universe(yi.header);
    const std::string close = plant_edits(ys, k, 4, Seed::from_u64(200 + t));
    const std::string far = generate_instance({InstanceKind::far, 480, 4, 0, 7, 0, Seed::from_u64(300 + t)}).x;
    for (const auto& [xs, want] : {std::pair{close, Decision::close}, std::pair{far, Decision::far}}) {
      const Text x = Text::from_bytes(xs);
      const std::size_t ed = edit_distance(x, y);
      ASSERT_TRUE(want == Decision::close ? ed <= k : ed >= 4 * theta);
      const Decision base = baseline_estimate(x, y, sh, s)[s.rank(0)] <= theta ? Decision::close : Decision::far;
      EXPECT_EQ(base, want);
      EXPECT_EQ(gap_query(x, yi).verdict.decision, want);
    }
  }
}
