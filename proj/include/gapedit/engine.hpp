#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gapedit/edit_distance.hpp"
#include "gapedit/matching_index.hpp"
#include "gapedit/precision_tree.hpp"
#include "gapedit/psl.hpp"
#include "gapedit/range_min.hpp"
#include "gapedit/shifted_distance_index.hpp"
#include "gapedit/text.hpp"

namespace gapedit {

enum class Side : std::uint8_t { x = 1, y = 2, both = 3 };

inline std::string_view to_string(Side s) {
  switch (s) {
    case Side::x: return "X";
    case Side::y: return "Y";
    default: return "BOTH";
  }
}

struct EngineConfig {
  std::uint64_t k = 1;
  std::uint32_t branching = 0;  // 0 selects the formula
  double lambda_const = 0.4;
  double u_min = 0;  // 0 selects n_padded^-3
  double c_h = 4.0;
  double kappa = 8.0;
  RecoverParams recover;
  double shift_base = 3;
  std::uint32_t reps = 0;  // 0 selects c_r * ceil(log2 n_padded)
  double c_r = 3;
  double budget = 0;  // operations per repetition; 0 selects the default formula
  double budget_factor = 4;
  std::uint64_t implicit_max_len = 0;
  std::uint64_t nominal_length = 0;  // 0 uses the preprocessed text's length
  Seed seed;

  double threshold() const { return kappa * static_cast<double>(k); }
};

// Everything both sides must agree on. Serialized as the index header.
struct IndexHeader {
  std::uint32_t version = 1;
  Side side = Side::y;
  AlphabetKind alphabet = AlphabetKind::bytes;
  std::uint64_t text_length = 0;
  std::uint64_t nominal_length = 0;
  TreeShape shape;
  std::uint64_t k = 1;
  double lambda_const = 0.4;
  double u_min = 0;  // effective value
  double c_h = 4;
  double kappa = 8;
  RecoverParams recover;
  double shift_base = 3;
  std::uint32_t reps = 1;
  double budget = 0;  // effective value
  std::uint64_t implicit_max_len = 0;  // effective value
  Seed seed;

  double threshold() const { return kappa * static_cast<double>(k); }
  bool side_has_x() const { return side == Side::x || side == Side::both; }
  bool side_has_y() const { return side == Side::y || side == Side::both; }
  double lambda() const { return lambda_const * std::log(std::max<double>(static_cast<double>(shape.n_padded), 4.0)); }

  TreeConfig tree_config(std::uint32_t repetition) const {
    TreeConfig c;
    c.shape = shape;
    c.k = k;
    c.lambda_const = lambda_const;
    c.u_min = u_min;
    c.shift_base = shift_base;
    c.master_seed = seed;
    c.repetition = repetition;
    return c;
  }
};

inline ShiftSet header_universe(const IndexHeader& h) { return shift_universe(h.k, h.shape, h.shift_base); }

inline double default_budget(const IndexHeader& h, double factor) {
  const ShiftSet s = header_universe(h);
  const double per_level = static_cast<double>(h.k + 1) * h.shape.branching * static_cast<double>(s.size()) +
                           static_cast<double>(h.shape.n_padded);
  return factor * per_level * (h.shape.depth + 1);
}

// The tree covers the nominal length plus k: an X longer than that differs
// from Y in length by more than k, so FAR is a valid answer without a tree.
inline IndexHeader make_header(const EngineConfig& cfg, std::uint64_t text_length, AlphabetKind alphabet, Side side) {
  if (cfg.k < 1) throw UsageError("k must be >= 1");
  IndexHeader h;
  h.side = side;
  h.alphabet = alphabet;
  h.text_length = text_length;
  h.nominal_length = cfg.nominal_length ? cfg.nominal_length : text_length;
  if (h.nominal_length < text_length && side != Side::x)
    throw UsageError("nominal length is shorter than the text");
  if (cfg.k > std::max<std::uint64_t>(h.nominal_length, 1)) throw UsageError("k exceeds the text length");
  h.shape = choose_shape(h.nominal_length + cfg.k, cfg.branching);
  if (text_length > h.shape.n_padded) throw UsageError("text longer than the tree built for the nominal length");
  h.k = cfg.k;
  h.lambda_const = cfg.lambda_const;
  h.u_min = cfg.u_min > 0 ? cfg.u_min : std::pow(static_cast<double>(h.shape.n_padded), -3.0);
  h.c_h = cfg.c_h;
  h.kappa = cfg.kappa;
  h.recover = cfg.recover;
  h.shift_base = cfg.shift_base;
  h.reps = cfg.reps ? cfg.reps
                    : static_cast<std::uint32_t>(std::max(1.0, cfg.c_r * std::ceil(std::log2(std::max<double>(
                                                                             2.0, static_cast<double>(h.shape.n_padded))))));
  h.implicit_max_len = cfg.implicit_max_len ? cfg.implicit_max_len : h.shape.branching;
  h.seed = cfg.seed;
  h.budget = cfg.budget > 0 ? cfg.budget : default_budget(h, cfg.budget_factor);
  h.tree_config(0).validate();
  return h;
}

// Names the first field on which two headers disagree, or empty if compatible.
inline std::string header_mismatch(const IndexHeader& a, const IndexHeader& b) {
  if (a.version != b.version) return "version";
  if (a.alphabet != b.alphabet) return "alphabet";
  if (a.shape.n_padded != b.shape.n_padded) return "n_padded";
  if (a.shape.branching != b.shape.branching) return "branching";
  if (a.k != b.k) return "k";
  if (a.lambda_const != b.lambda_const) return "lambda_const";
  if (a.u_min != b.u_min) return "u_min";
  if (a.c_h != b.c_h) return "c_h";
  if (a.kappa != b.kappa) return "kappa";
  if (a.shift_base != b.shift_base) return "shift_base";
  if (!(a.seed == b.seed)) return "seed";
  if (a.reps != b.reps) return "reps";
  return {};
}

struct PreprocessStats {
  std::uint64_t wall_nanos = 0;
  std::uint64_t nodes = 0;
  std::uint64_t sample_positions = 0;
  std::uint64_t fingerprint_entries = 0;
  std::uint64_t dense_nodes = 0;
  std::uint64_t dense_cells = 0;
};

struct RepetitionY {
  PrecisionTree tree;
  ShiftSet universe;
  MatchingIndex matching;
  ShiftedDistanceIndex distances;
};

struct RepetitionX {
  PrecisionTree tree;
  NodeHashes hashes;
  std::vector<std::uint64_t> fingerprints;
};

struct YIndex {
  IndexHeader header;
  std::shared_ptr<const Text> text;  // padded
  std::vector<RepetitionY> reps;
  PreprocessStats stats;
};

struct XIndex {
  IndexHeader header;
  std::shared_ptr<const Text> text;  // padded
  std::vector<RepetitionX> reps;
  PreprocessStats stats;
};

inline std::uint64_t elapsed_nanos(std::chrono::steady_clock::time_point start) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());
}

inline RepetitionY build_repetition_y(const IndexHeader& h, const std::shared_ptr<const Text>& y, std::uint32_t r,
                                      ShiftedDistanceCache* cache, const Approximator& approx = exact_approximator()) {
  RepetitionY rep;
  rep.tree = PrecisionTree(h.tree_config(r));
  rep.universe = header_universe(h);
  rep.matching = MatchingIndex(*y, rep.tree, rep.universe, h.c_h);
  ShiftedDistancePolicy policy;
  policy.implicit_max_len = h.implicit_max_len;
  rep.distances = ShiftedDistanceIndex(y, rep.tree, rep.universe, policy, approx, cache);
  return rep;
}

inline YIndex preprocess_y(const Text& y, const EngineConfig& cfg, AlphabetKind alphabet = AlphabetKind::bytes) {
  const auto start = std::chrono::steady_clock::now();
  YIndex idx;
  idx.header = make_header(cfg, y.size(), alphabet, Side::y);
  idx.text = std::make_shared<const Text>(y.padded_to(idx.header.shape.n_padded));
  ShiftedDistanceCache cache;
  for (std::uint32_t r = 0; r < idx.header.reps; ++r) {
    idx.reps.push_back(build_repetition_y(idx.header, idx.text, r, &cache));
    const RepetitionY& rep = idx.reps.back();
    idx.stats.nodes += rep.tree.size();
    for (std::uint64_t v = 0; v < rep.tree.size(); ++v) {
      idx.stats.sample_positions += rep.matching.hashes()[v].sample.size();
      idx.stats.fingerprint_entries += rep.matching.table(v).size();
      idx.stats.dense_nodes += rep.distances.node(v).dense;
    }
    idx.stats.dense_cells += rep.distances.dense_cells();
  }
  idx.stats.wall_nanos = elapsed_nanos(start);
  return idx;
}

inline RepetitionX build_repetition_x(const IndexHeader& h, const Text& x_padded, std::uint32_t r) {
  RepetitionX rep;
  rep.tree = PrecisionTree(h.tree_config(r));
  rep.hashes = NodeHashes(rep.tree, h.c_h);
  rep.fingerprints = x_fingerprints(x_padded, rep.tree, rep.hashes);
  return rep;
}

inline XIndex preprocess_x(const Text& x, const EngineConfig& cfg, AlphabetKind alphabet = AlphabetKind::bytes) {
  const auto start = std::chrono::steady_clock::now();
  XIndex idx;
  idx.header = make_header(cfg, x.size(), alphabet, Side::x);
  idx.text = std::make_shared<const Text>(x.padded_to(idx.header.shape.n_padded));
  for (std::uint32_t r = 0; r < idx.header.reps; ++r) {
    idx.reps.push_back(build_repetition_x(idx.header, *idx.text, r));
    idx.stats.nodes += idx.reps.back().tree.size();
    for (std::uint64_t v = 0; v < idx.reps.back().tree.size(); ++v)
      idx.stats.sample_positions += idx.reps.back().hashes[v].sample.size();
  }
  idx.stats.wall_nanos = elapsed_nanos(start);
  return idx;
}

struct QueryStats {
  std::uint64_t x_reads = 0;  // reads of the raw X supplied at query time
  std::uint64_t y_reads = 0;  // reads of the raw Y supplied at query time
  std::uint64_t nodes_visited = 0;
  std::uint64_t prune_hits = 0;
  std::uint64_t prune_fails = 0;
  std::uint64_t leaf_hits = 0;
  std::uint64_t table_lookups = 0;  // fingerprint and shifted-distance lookups
  std::uint64_t index_symbol_reads = 0;  // symbols read from index storage
  std::uint64_t distance_cells = 0;  // DP cells evaluated for on-demand distances
  std::uint64_t operations = 0;  // budgeted count
  std::uint64_t wall_nanos = 0;

  QueryStats& operator+=(const QueryStats& o) {
    x_reads += o.x_reads;
    y_reads += o.y_reads;
    nodes_visited += o.nodes_visited;
    prune_hits += o.prune_hits;
    prune_fails += o.prune_fails;
    leaf_hits += o.leaf_hits;
    table_lookups += o.table_lookups;
    index_symbol_reads += o.index_symbol_reads;
    distance_cells += o.distance_cells;
    operations += o.operations;
    wall_nanos += o.wall_nanos;
    return *this;
  }
};

enum class Decision : std::uint8_t { close = 0, far = 1 };

inline std::string_view to_string(Decision d) { return d == Decision::close ? "CLOSE" : "FAR"; }

struct RepetitionOutcome {
  std::uint32_t repetition = 0;
  Decision decision = Decision::far;
  double estimate = 0;
  bool timed_out = false;
  QueryStats stats;
};

struct GapVerdict {
  Decision decision = Decision::far;
  double estimate = 0;  // median root estimate over completed repetitions
  double threshold = 0;
  bool timed_out = false;  // some repetition ran out of budget
  std::uint32_t close_votes = 0;
  std::uint32_t far_votes = 0;
  std::uint32_t reps_run = 0;
  std::uint32_t reps_total = 0;
  bool length_shortcut = false;
};

struct QueryResult {
  GapVerdict verdict;
  QueryStats stats;
  std::vector<RepetitionOutcome> repetitions;
};

struct NodeEstimate {
  std::uint64_t node_id = 0;
  ShiftSet shifts;
  std::vector<double> values;

  double at(std::int64_t s) const { return values[shifts.rank(s)]; }
};

struct BudgetExceeded {};

// Raw X supplied at query time; each read is counted. Positions past |X| but
// inside the tree read as PAD without touching X.
class OneSidedX {
 public:
  OneSidedX(const Text& x, std::uint64_t n_padded) : x_(&x), n_padded_(static_cast<std::int64_t>(n_padded)) {}

  Symbol read(std::int64_t pos, QueryStats& st) {
    if (pos == last_pos_) return last_sym_;  // the leaf test and leaf DP share one read
    last_pos_ = pos;
    if (pos >= 0 && pos < static_cast<std::int64_t>(x_->size())) {
      ++st.x_reads;
      last_sym_ = (*x_)[static_cast<std::size_t>(pos)];
    } else {
      last_sym_ = pos >= 0 && pos < n_padded_ ? kPad : kBottom;
    }
    return last_sym_;
  }

  MatchResult match(const MatchingIndex& m, const PrecisionNode& v, std::uint32_t, QueryStats& st) {
    const NodeHash& h = m.hashes()[v.id];
    const std::uint64_t p = m.modulus();
    const auto a = static_cast<std::int64_t>(v.range_start);
    std::uint64_t acc = 0;
    for (std::size_t j = 0; j < h.sample.size(); ++j) {
      acc += mulmod(h.coeff[j], symbol_code(read(a + h.sample[j], st), p), p);
      if (acc >= p) acc -= p;
    }
    ++st.table_lookups;
    return m.lookup(v.id, acc);
  }

 private:
  const Text* x_;
  std::int64_t n_padded_;
  std::int64_t last_pos_ = -1;
  Symbol last_sym_ = kBottom;
};

// Preprocessed X: fingerprints and symbols come from index storage.
class TwoSidedX {
 public:
  explicit TwoSidedX(const XIndex& x) : x_(&x) {}

  Symbol read(std::int64_t pos, QueryStats& st) {
    ++st.index_symbol_reads;
    return x_->text->at(pos);
  }

  MatchResult match(const MatchingIndex& m, const PrecisionNode& v, std::uint32_t rep, QueryStats& st) {
    st.table_lookups += 2;
    return m.lookup(v.id, x_->reps[rep].fingerprints[v.id]);
  }

 private:
  const XIndex* x_;
};

// One repetition of the recursion over a Y index.
template <class XAccess>
class RepetitionRunner {
 public:
  RepetitionRunner(const YIndex& y, std::uint32_t rep, XAccess& x, double budget)
      : y_(&y), rep_(&y.reps[rep]), rep_no_(rep), x_(&x), budget_(budget), lambda_(y.header.lambda()) {}

  QueryStats& stats() noexcept { return stats_; }

  // Pruning: answer the whole shift vector from the tables, or fail.
  std::optional<NodeEstimate> prune_node(const PrecisionNode& v) {
    const MatchResult m = x_->match(rep_->matching, v, rep_no_, stats_);
    charge(1);
    if (!m.close) {
      ++stats_.prune_fails;
      return std::nullopt;
    }
    ++stats_.prune_hits;
    NodeEstimate e = blank(v);
    const std::vector<std::int64_t> targets = members(e.shifts);
    std::vector<std::uint32_t> raw(targets.size());
    rep_->distances.query_row(v, m.shift, targets, raw, stats_.distance_cells);
    stats_.table_lookups += targets.size();
    charge(targets.size());
    for (std::size_t i = 0; i < raw.size(); ++i) e.values[i] = raw[i];
    return e;
  }

  // Full recursion: children by pruning or recursion, then transfer and Recover.
  NodeEstimate approx_node(const PrecisionNode& v) {
    ++stats_.nodes_visited;
    charge(1);
    if (auto pruned = prune_node(v)) return std::move(*pruned);
    const PrecisionTree& tree = rep_->tree;
    NodeEstimate e = blank(v);
    if (tree.is_leaf(v.id)) {
      ++stats_.leaf_hits;
      const Symbol c = x_->read(static_cast<std::int64_t>(v.range_start), stats_);
      const Text& y = *y_->text;
      for (std::size_t i = 0; i < e.values.size(); ++i)
        e.values[i] = c == y.at(static_cast<std::int64_t>(v.range_start) + e.shifts.value(i)) ? 0.0 : 1.0;
      stats_.index_symbol_reads += e.values.size();
      charge(e.values.size());
      return e;
    }
    const std::vector<std::int64_t> mine = members(e.shifts);
    std::vector<double> moved(mine.size());
    const std::uint64_t first = tree.first_child(v.id);
    for (std::uint32_t i = 0; i < tree.shape().branching; ++i) {
      const PrecisionNode& child = tree.node(first + i);
      NodeEstimate ce = approx_node(child);
      const std::vector<std::int64_t> theirs = members(ce.shifts);
      range_min_transfer<double>(mine, theirs, ce.values, moved);
      charge(mine.size() + theirs.size());
      for (std::size_t s = 0; s < mine.size(); ++s)
        e.values[s] += recover_term(moved[s], child.u, lambda_, v.tolerance, y_->header.recover);
    }
    return e;
  }

  RepetitionOutcome run() {
    const auto start = std::chrono::steady_clock::now();
    RepetitionOutcome out;
    out.repetition = rep_no_;
    try {
      const NodeEstimate root = approx_node(rep_->tree.root());
      out.estimate = root.at(0);
      out.decision = out.estimate <= y_->header.threshold() ? Decision::close : Decision::far;
    } catch (const BudgetExceeded&) {
      out.timed_out = true;
      out.decision = Decision::far;
      out.estimate = std::numeric_limits<double>::infinity();
    }
    stats_.wall_nanos = elapsed_nanos(start);
    out.stats = stats_;
    return out;
  }

 private:
  void charge(std::uint64_t ops) {
    stats_.operations += ops;
    if (static_cast<double>(stats_.operations) > budget_) throw BudgetExceeded{};
  }

  NodeEstimate blank(const PrecisionNode& v) const {
    NodeEstimate e;
    e.node_id = v.id;
    e.shifts = rep_->distances.node(v.id).local;
    e.values.assign(e.shifts.size(), 0.0);
    return e;
  }

  static std::vector<std::int64_t> members(const ShiftSet& s) {
    std::vector<std::int64_t> out(s.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.value(i);
    return out;
  }

  const YIndex* y_;
  const RepetitionY* rep_;
  std::uint32_t rep_no_;
  XAccess* x_;
  double budget_;
  double lambda_;
  QueryStats stats_;
};

struct QueryOptions {
  bool early_stop = true;  // stop once the majority is decided
  double budget = 0;  // per-repetition operations; 0 uses the index header
};

namespace detail {

template <class MakeAccess>
QueryResult vote(const YIndex& y, std::uint64_t x_length, const QueryOptions& opt, MakeAccess make_access) {
  const auto start = std::chrono::steady_clock::now();
  QueryResult res;
  GapVerdict& g = res.verdict;
  const IndexHeader& h = y.header;
  g.threshold = h.threshold();
  g.reps_total = h.reps;
  const double diff = std::abs(static_cast<double>(x_length) - static_cast<double>(h.text_length));
  if (diff > g.threshold || x_length > h.shape.n_padded) {
    g.decision = Decision::far;
    g.length_shortcut = true;
    g.estimate = diff;
    res.stats.wall_nanos = elapsed_nanos(start);
    return res;
  }
  const double budget = opt.budget > 0 ? opt.budget : h.budget;
  const std::uint32_t need = h.reps / 2 + 1;
  std::vector<double> estimates;
  for (std::uint32_t r = 0; r < h.reps; ++r) {
    auto access = make_access();
    RepetitionRunner runner(y, r, access, budget);
    RepetitionOutcome o = runner.run();
    res.stats += o.stats;
    ++g.reps_run;
    (o.decision == Decision::close ? g.close_votes : g.far_votes)++;
    g.timed_out = g.timed_out || o.timed_out;
    if (!o.timed_out) estimates.push_back(o.estimate);
    res.repetitions.push_back(std::move(o));
    if (opt.early_stop && (g.close_votes >= need || g.far_votes > h.reps - need)) break;
  }
  g.decision = g.close_votes >= need ? Decision::close : Decision::far;
  if (!estimates.empty()) {
    std::sort(estimates.begin(), estimates.end());
    g.estimate = estimates[estimates.size() / 2];
  } else {
    g.estimate = std::numeric_limits<double>::infinity();
  }
  res.stats.wall_nanos = elapsed_nanos(start);
  return res;
}

}  // namespace detail

// One-sided: X is raw and read through the sampled positions only.
inline QueryResult gap_query(const Text& x, const YIndex& y, const QueryOptions& opt = {}) {
  if (!y.header.side_has_y()) throw UsageError("index does not contain Y tables");
  return detail::vote(y, x.size(), opt, [&] { return OneSidedX(x, y.header.shape.n_padded); });
}

// Two-sided: both strings were preprocessed with the same seed and shape.
inline QueryResult gap_query(const XIndex& x, const YIndex& y, const QueryOptions& opt = {}) {
  if (!y.header.side_has_y()) throw UsageError("index does not contain Y tables");
  if (!x.header.side_has_x()) throw UsageError("index does not contain X fingerprints");
  if (const std::string f = header_mismatch(x.header, y.header); !f.empty())
    throw UsageError("incompatible indexes: field '" + f + "' differs");
  return detail::vote(y, x.header.text_length, opt, [&] { return TwoSidedX(x); });
}

// Simple recombination: no pruning, no sampling, S at every node, exact
// leaves, children summed after the range-min transfer.
inline std::vector<double> baseline_estimate(const Text& x, const Text& y, const TreeShape& shape, const ShiftSet& universe,
                                             std::uint64_t cap = 512) {
  if (shape.n_padded > cap) throw UsageError("baseline refuses n_padded above its cap");
  const Text xp = x.padded_to(std::max<std::size_t>(x.size(), shape.n_padded));
  const Text yp = y.padded_to(std::max<std::size_t>(y.size(), shape.n_padded));
  std::vector<std::int64_t> shifts(universe.size());
  for (std::size_t i = 0; i < shifts.size(); ++i) shifts[i] = universe.value(i);
  auto solve = [&](auto&& self, std::uint32_t depth, std::uint64_t start) -> std::vector<double> {
    std::vector<double> out(shifts.size(), 0.0);
    if (depth == shape.depth) {
      const Symbol c = xp.at(static_cast<std::int64_t>(start));
      for (std::size_t i = 0; i < shifts.size(); ++i)
        out[i] = c == yp.at(static_cast<std::int64_t>(start) + shifts[i]) ? 0.0 : 1.0;
      return out;
    }
    const std::uint64_t len = shape.range_len(depth + 1);
    std::vector<double> moved(shifts.size());
    for (std::uint32_t c = 0; c < shape.branching; ++c) {
      const std::vector<double> child = self(self, depth + 1, start + c * len);
      range_min_transfer<double>(shifts, shifts, child, moved);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += moved[i];
    }
    return out;
  };
  return solve(solve, 0, 0);
}

}  // namespace gapedit
