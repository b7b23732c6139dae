#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gapedit/edit_distance.hpp"
#include "gapedit/precision_tree.hpp"
#include "gapedit/text.hpp"

namespace gapedit {

// Distance oracle between equal-length windows of one text. For every target
// q in `targets`, out[i] = min(approx(Y[p..p+len), Y[q..q+len)), cap) with
// ED <= approx <= rho * ED. `cells` accumulates DP work for instrumentation.
struct Approximator {
  std::string name;
  double rho = 1;
  std::function<void(const Text& y, std::int64_t p, std::span<const std::int64_t> targets, std::size_t len,
                     std::uint32_t cap, std::span<std::uint32_t> out, std::uint64_t& cells)>
      row;
};

inline Approximator exact_approximator() {
  Approximator a;
  a.name = "exact-banded";
  a.rho = 1;
  a.row = [](const Text& y, std::int64_t p, std::span<const std::int64_t> targets, std::size_t len, std::uint32_t cap,
             std::span<std::uint32_t> out, std::uint64_t& cells) {
    const BlockPattern pat(Window(y, p, len));
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::int64_t d = targets[i] > p ? targets[i] - p : p - targets[i];
      // shifting by d costs at most 2d, so that bound never truncates
      const std::uint64_t bound = std::min<std::uint64_t>({2 * static_cast<std::uint64_t>(d), cap, len});
      if (bound == 0) {
        out[i] = 0;
        continue;
      }
      cells += len * (bound + 1);
      const auto r = bounded_edit_distance(pat, Window(y, targets[i], len), bound);
      out[i] = r ? static_cast<std::uint32_t>(*r) : cap;
    }
  };
  return a;
}

struct ShiftedDistancePolicy {
  // Nodes no longer than this are answered from the stored text on demand.
  std::uint64_t implicit_max_len = 0;  // 0 selects B
};

// Dense blocks depend only on (range, S_v, S) so they are shared between
// repetitions over the same text.
class ShiftedDistanceCache {
 public:
  using Key = std::tuple<std::uint64_t, std::uint64_t, std::int64_t, std::int64_t, std::uint32_t>;
  std::shared_ptr<const std::vector<std::uint32_t>> find(const Key& k) const {
    auto it = blocks_.find(k);
    return it == blocks_.end() ? nullptr : it->second;
  }
  void put(const Key& k, std::shared_ptr<const std::vector<std::uint32_t>> v) { blocks_[k] = std::move(v); }
  std::size_t size() const noexcept { return blocks_.size(); }

 private:
  std::map<Key, std::shared_ptr<const std::vector<std::uint32_t>>> blocks_;
};

struct ShiftedDistanceNode {
  ShiftSet local;  // S_v
  std::uint32_t cap = 0;
  bool dense = false;
  std::shared_ptr<const std::vector<std::uint32_t>> values;  // rank(s~) * |S| + rank(s')
};

class ShiftedDistanceIndex {
 public:
  ShiftedDistanceIndex() = default;

  ShiftedDistanceIndex(std::shared_ptr<const Text> y_padded, const PrecisionTree& tree, const ShiftSet& universe,
                       ShiftedDistancePolicy policy = {}, Approximator approx = exact_approximator(),
                       ShiftedDistanceCache* cache = nullptr)
      : y_(std::move(y_padded)), universe_(universe), approx_(std::move(approx)) {
    const std::uint64_t limit = policy.implicit_max_len ? policy.implicit_max_len : tree.shape().branching;
    nodes_.resize(tree.size());
    for (const PrecisionNode& v : tree.nodes()) {
      ShiftedDistanceNode& nd = nodes_[v.id];
      nd.local = node_shifts(v, universe_);
      nd.cap = node_cap(v, universe_);
      nd.dense = v.range_len > limit;
      if (!nd.dense) continue;
      const ShiftedDistanceCache::Key key{v.range_start, v.range_len, nd.local.step, universe_.hi, nd.cap};
      if (cache) nd.values = cache->find(key);
      if (!nd.values) {
        nd.values = std::make_shared<const std::vector<std::uint32_t>>(fill_dense(v, nd));
        if (cache) cache->put(key, nd.values);
      }
      dense_cells_ += nd.values->size();
    }
  }

  // Reassembles an index from stored blocks.
  ShiftedDistanceIndex(std::shared_ptr<const Text> y_padded, const ShiftSet& universe,
                       std::vector<ShiftedDistanceNode> nodes, Approximator approx = exact_approximator())
      : y_(std::move(y_padded)), universe_(universe), approx_(std::move(approx)), nodes_(std::move(nodes)) {
    for (const auto& nd : nodes_)
      if (nd.dense) dense_cells_ += nd.values->size();
  }

  static std::uint32_t node_cap(const PrecisionNode& v, const ShiftSet& universe) {
    return static_cast<std::uint32_t>(universe.hi + static_cast<std::int64_t>(std::ceil(v.tolerance)));
  }

  const ShiftSet& universe() const noexcept { return universe_; }
  const ShiftedDistanceNode& node(std::uint64_t id) const { return nodes_[id]; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::uint64_t dense_cells() const noexcept { return dense_cells_; }
  const Approximator& approximator() const noexcept { return approx_; }

  // ED~(Y_{v,s~}, Y_{v,s'}) with s~ the member of S_v nearest to s.
  std::uint32_t query(const PrecisionNode& v, std::int64_t s, std::int64_t s2) const {
    std::uint32_t out = 0;
    const std::int64_t t[1] = {s2};
    std::uint64_t cells = 0;
    query_row(v, s, std::span<const std::int64_t>(t, 1), std::span<std::uint32_t>(&out, 1), cells);
    return out;
  }

  void query_row(const PrecisionNode& v, std::int64_t s, std::span<const std::int64_t> targets,
                 std::span<std::uint32_t> out, std::uint64_t& cells) const {
    if (!universe_.contains(s)) throw UsageError("shifted-distance query: shift outside S");
    for (std::int64_t t : targets)
      if (!universe_.contains(t)) throw UsageError("shifted-distance query: shift outside S");
    const ShiftedDistanceNode& nd = nodes_[v.id];
    const std::int64_t rounded = nd.local.nearest(s);
    if (nd.dense) {
      const std::size_t base = nd.local.rank(rounded) * universe_.size();
      for (std::size_t i = 0; i < targets.size(); ++i) out[i] = (*nd.values)[base + universe_.rank(targets[i])];
      return;
    }
    const std::int64_t a = static_cast<std::int64_t>(v.range_start);
    std::vector<std::int64_t> qs(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) qs[i] = a + targets[i];
    approx_.row(*y_, a + rounded, qs, v.range_len, nd.cap, out, cells);
  }

 private:
  std::vector<std::uint32_t> fill_dense(const PrecisionNode& v, const ShiftedDistanceNode& nd) const {
    const std::size_t rows = nd.local.size(), cols = universe_.size();
    std::vector<std::uint32_t> values(rows * cols);
    const std::int64_t a = static_cast<std::int64_t>(v.range_start);
    std::vector<std::int64_t> qs;
    std::vector<std::size_t> where;
    std::vector<std::uint32_t> got;
    std::uint64_t cells = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      const std::int64_t st = nd.local.value(r);
      qs.clear();
      where.clear();
      for (std::size_t c = 0; c < cols; ++c) {
        const std::int64_t sp = universe_.value(c);
        // entries already filled by symmetry from an earlier row
        if (nd.local.contains(sp) && nd.local.rank(sp) < r) {
          values[r * cols + c] = values[nd.local.rank(sp) * cols + universe_.rank(st)];
          continue;
        }
        qs.push_back(a + sp);
        where.push_back(c);
      }
      got.assign(qs.size(), 0);
      approx_.row(*y_, a + st, qs, v.range_len, nd.cap, got, cells);
      for (std::size_t i = 0; i < where.size(); ++i) values[r * cols + where[i]] = got[i];
    }
    return values;
  }

  std::shared_ptr<const Text> y_;
  ShiftSet universe_;
  Approximator approx_;
  std::vector<ShiftedDistanceNode> nodes_;
  std::uint64_t dense_cells_ = 0;
};

}  // namespace gapedit
