#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "gapedit/range_min.hpp"

using namespace gapedit;

namespace {

std::vector<std::int64_t> brute(const std::vector<std::int64_t>& t, const std::vector<std::int64_t>& tp,
                                const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> out(t.size(), std::numeric_limits<std::int64_t>::max());
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < tp.size(); ++j) out[i] = std::min(out[i], b[j] + 2 * std::abs(t[i] - tp[j]));
  return out;
}

std::vector<std::int64_t> sorted_set(std::mt19937_64& rng, std::size_t max_size) {
  std::set<std::int64_t> s;
  const std::size_t n = 1 + rng() % max_size;
  while (s.size() < n) s.insert(static_cast<std::int64_t>(rng() % 2001) - 1000);
  return {s.begin(), s.end()};
}

}  // namespace

TEST(RangeMin, Example) {
  EXPECT_EQ(range_min_transfer<std::int64_t>({0, 2}, {-1, 1}, {5, 0}), (std::vector<std::int64_t>{2, 2}));
}

TEST(RangeMin, SameSetNeverExceedsSource) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = sorted_set(rng, 50);
    std::vector<std::int64_t> b(t.size());
    for (auto& x : b) x = static_cast<std::int64_t>(rng() % 100);
    const auto a = range_min_transfer<std::int64_t>(t, t, b);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_LE(a[i], b[i]);
  }
}

TEST(RangeMin, MatchesBruteForce) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto t = sorted_set(rng, 200), tp = sorted_set(rng, 200);
    std::vector<std::int64_t> b(tp.size());
    for (auto& x : b) x = static_cast<std::int64_t>(rng() % 5000);
    ASSERT_EQ(range_min_transfer<std::int64_t>(t, tp, b), brute(t, tp, b));
  }
}

TEST(RangeMin, DoublesMatchBruteForce) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = sorted_set(rng, 30), tp = sorted_set(rng, 30);
    std::vector<double> b(tp.size());
    std::vector<std::int64_t> bi(tp.size());
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = static_cast<double>(bi[j] = static_cast<std::int64_t>(rng() % 300));
    const auto got = range_min_transfer<double>(t, tp, b);
    const auto want = brute(t, tp, bi);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(got[i], static_cast<double>(want[i]));
  }
}

TEST(RangeMin, Errors) {
  EXPECT_THROW(range_min_transfer<std::int64_t>({0}, {}, {}), UsageError);
  EXPECT_THROW(range_min_transfer<std::int64_t>({0}, {1, 2}, {0}), UsageError);
}
