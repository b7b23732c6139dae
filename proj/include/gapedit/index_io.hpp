#pragma once

#include <sodium.h>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unistd.h>
#include <vector>

#include "gapedit/engine.hpp"
#include "gapedit/random.hpp"

namespace gapedit {

// File layout, all integers little-endian:
//   "GEDI1" | u32 header_len | header | 32-byte BLAKE2b(header)
//   then sections: u32 tag | u64 len | payload | 32-byte BLAKE2b(payload)
// Section order is fixed: text, then Y repetitions, then X repetitions.
inline constexpr char kIndexMagic[5] = {'G', 'E', 'D', 'I', '1'};

class IndexFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SectionTag : std::uint32_t { text = 1, rep_y = 2, rep_x = 3 };

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { fixed(v, 4); }
  void u64(std::uint64_t v) { fixed(v, 8); }
  void i64(std::int64_t v) { fixed(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      u8(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    u8(static_cast<std::uint8_t>(v));
  }
  std::string& str() noexcept { return buf_; }

 private:
  void fixed(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(fixed(4)); }
  std::uint64_t u64() { return fixed(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(fixed(8)); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view v = data_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return v;
    }
    throw IndexFormatError("index: malformed varint");
  }
  // Element count about to be read at `width` bytes each; rejects counts the
  // remaining input cannot hold before anything is allocated.
  std::uint64_t count(std::size_t width) {
    const std::uint64_t n = u64();
    if (width && n > remaining() / width) throw IndexFormatError("index: truncated array");
    return n;
  }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool done() const noexcept { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw IndexFormatError("index: truncated input");
  }
  std::uint64_t fixed(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_++])) << (8 * i);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::array<std::uint8_t, 32> checksum(std::string_view data) {
  ensure_sodium();
  std::array<std::uint8_t, 32> out{};
  crypto_generichash_blake2b(out.data(), out.size(), reinterpret_cast<const unsigned char*>(data.data()), data.size(),
                             nullptr, 0);
  return out;
}

// A preprocessed text. side Y carries `y`, side X carries `x`, BOTH carries
// both over the same text and header.
struct IndexBundle {
  IndexHeader header;
  std::optional<YIndex> y;
  std::optional<XIndex> x;

  const Text& text() const { return y ? *y->text : *x->text; }
};

inline IndexBundle preprocess(const Text& t, const EngineConfig& cfg, Side side,
                              AlphabetKind alphabet = AlphabetKind::bytes) {
  IndexBundle b;
  if (side == Side::x) {
    b.x = preprocess_x(t, cfg, alphabet);
    b.header = b.x->header;
    return b;
  }
  b.y = preprocess_y(t, cfg, alphabet);
  b.header = b.y->header;
  if (side == Side::both) {
    b.header.side = Side::both;
    b.y->header.side = Side::both;
    XIndex x;
    const auto start = std::chrono::steady_clock::now();
    x.header = b.header;
    x.text = b.y->text;
    for (std::uint32_t r = 0; r < b.header.reps; ++r) {
      RepetitionX rep;
      rep.tree = b.y->reps[r].tree;
      rep.hashes = b.y->reps[r].matching.hashes();
      rep.fingerprints = x_fingerprints(*x.text, rep.tree, rep.hashes);
      x.reps.push_back(std::move(rep));
    }
    b.y->stats.wall_nanos += elapsed_nanos(start);
    b.x = std::move(x);
  }
  return b;
}

namespace detail {

inline void write_header(ByteWriter& w, const IndexHeader& h) {
  w.u32(h.version);
  w.u8(static_cast<std::uint8_t>(h.side));
  w.u8(static_cast<std::uint8_t>(h.alphabet));
  w.u64(h.text_length);
  w.u64(h.nominal_length);
  w.u64(h.shape.n_padded);
  w.u32(h.shape.branching);
  w.u32(h.shape.depth);
  w.u64(h.k);
  w.f64(h.lambda_const);
  w.f64(h.u_min);
  w.f64(h.c_h);
  w.f64(h.kappa);
  w.f64(h.recover.c1);
  w.f64(h.recover.c2);
  w.f64(h.recover.ramp_lo);
  w.f64(h.recover.ramp_hi);
  w.f64(h.shift_base);
  w.u32(h.reps);
  w.f64(h.budget);
  w.u64(h.implicit_max_len);
  w.bytes(h.seed.bytes.data(), h.seed.bytes.size());
}

inline IndexHeader read_header(ByteReader& r) {
  IndexHeader h;
  h.version = r.u32();
  if (h.version != 1) throw IndexFormatError("index: unsupported version " + std::to_string(h.version));
  const std::uint8_t side = r.u8(), alpha = r.u8();
  if (side < 1 || side > 3) throw IndexFormatError("index: bad side");
  if (alpha > 1) throw IndexFormatError("index: bad alphabet kind");
  h.side = static_cast<Side>(side);
  h.alphabet = static_cast<AlphabetKind>(alpha);
  h.text_length = r.u64();
  h.nominal_length = r.u64();
  h.shape.n_padded = r.u64();
  h.shape.branching = r.u32();
  h.shape.depth = r.u32();
  h.k = r.u64();
  h.lambda_const = r.f64();
  h.u_min = r.f64();
  h.c_h = r.f64();
  h.kappa = r.f64();
  h.recover.c1 = r.f64();
  h.recover.c2 = r.f64();
  h.recover.ramp_lo = r.f64();
  h.recover.ramp_hi = r.f64();
  h.shift_base = r.f64();
  h.reps = r.u32();
  h.budget = r.f64();
  h.implicit_max_len = r.u64();
  const std::string_view seed = r.bytes(32);
  std::memcpy(h.seed.bytes.data(), seed.data(), 32);
  if (h.shape.branching < 2 || h.shape.depth > 64 || checked_pow(h.shape.branching, h.shape.depth) != h.shape.n_padded)
    throw IndexFormatError("index: inconsistent tree shape");
  if (h.text_length > h.shape.n_padded) throw IndexFormatError("index: text longer than tree");
  return h;
}

inline void write_tree(ByteWriter& w, const PrecisionTree& t, const NodeHashes& h) {
  w.u64(t.size());
  for (const PrecisionNode& v : t.nodes()) {
    w.f64(v.tolerance);
    w.f64(v.u);
  }
  // sample sets, delta-coded
  for (std::uint64_t id = 0; id < t.size(); ++id) {
    const auto& s = h[id].sample;
    w.varint(s.size());
    std::uint32_t prev = 0;
    for (std::uint32_t p : s) {
      w.varint(p - prev);
      prev = p;
    }
  }
}

// The tree and hashes are regenerated from the header seed; the stored copy
// must agree bit for bit, which catches a header edited without its tables.
inline void read_tree(ByteReader& r, const IndexHeader& h, std::uint32_t rep, PrecisionTree& tree, NodeHashes& hashes) {
  tree = PrecisionTree(h.tree_config(rep));
  hashes = NodeHashes(tree, h.c_h);
  if (r.count(16) != tree.size()) throw IndexFormatError("index: tree size mismatch");
  for (const PrecisionNode& v : tree.nodes()) {
    const double tol = r.f64(), u = r.f64();
    if (std::bit_cast<std::uint64_t>(tol) != std::bit_cast<std::uint64_t>(v.tolerance) ||
        std::bit_cast<std::uint64_t>(u) != std::bit_cast<std::uint64_t>(v.u))
      throw IndexFormatError("index: tree descriptor does not match the header seed");
  }
  for (std::uint64_t id = 0; id < tree.size(); ++id) {
    const auto& s = hashes[id].sample;
    if (r.varint() != s.size()) throw IndexFormatError("index: sample set mismatch");
    std::uint32_t prev = 0;
    for (std::uint32_t p : s) {
      if (r.varint() != p - prev) throw IndexFormatError("index: sample set mismatch");
      prev = p;
    }
  }
}

inline void write_section(ByteWriter& out, SectionTag tag, const std::string& payload) {
  out.u32(static_cast<std::uint32_t>(tag));
  out.u64(payload.size());
  out.bytes(payload.data(), payload.size());
  const auto sum = checksum(payload);
  out.bytes(sum.data(), sum.size());
}

inline std::string_view read_section(ByteReader& r, SectionTag tag) {
  if (r.u32() != static_cast<std::uint32_t>(tag)) throw IndexFormatError("index: unexpected section");
  const std::uint64_t len = r.u64();
  if (len > r.remaining()) throw IndexFormatError("index: truncated section");
  const std::string_view payload = r.bytes(len);
  const auto want = checksum(payload);
  if (std::memcmp(r.bytes(32).data(), want.data(), 32) != 0) throw IndexFormatError("index: section checksum mismatch");
  return payload;
}

}  // namespace detail

inline std::string save_index(const IndexBundle& b) {
  ByteWriter out;
  out.bytes(kIndexMagic, sizeof kIndexMagic);
  {
    ByteWriter h;
    detail::write_header(h, b.header);
    out.u32(static_cast<std::uint32_t>(h.str().size()));
    out.bytes(h.str().data(), h.str().size());
    const auto sum = checksum(h.str());
    out.bytes(sum.data(), sum.size());
  }
  {
    ByteWriter w;
    const Text& t = b.text();
    w.u32(t.alphabet_size());
    w.u64(t.size());
    for (Symbol s : t.symbols()) w.u32(s);
    detail::write_section(out, SectionTag::text, w.str());
  }
  if (b.y) {
    for (std::uint32_t r = 0; r < b.y->reps.size(); ++r) {
      const RepetitionY& rep = b.y->reps[r];
      ByteWriter w;
      w.u32(r);
      detail::write_tree(w, rep.tree, rep.matching.hashes());
      for (std::uint64_t id = 0; id < rep.tree.size(); ++id) {
        const auto& t = rep.matching.table(id);
        w.u64(t.size());
        for (const auto& e : t) {
          w.u64(e.fingerprint);
          w.i64(e.shift);
        }
      }
      for (std::uint64_t id = 0; id < rep.tree.size(); ++id) {
        const ShiftedDistanceNode& nd = rep.distances.node(id);
        w.u8(nd.dense);
        w.u32(nd.cap);
        w.i64(nd.local.lo);
        w.i64(nd.local.hi);
        w.i64(nd.local.step);
        if (nd.dense) {
          w.u64(nd.values->size());
          for (std::uint32_t x : *nd.values) w.u32(x);
        }
      }
      detail::write_section(out, SectionTag::rep_y, w.str());
    }
  }
  if (b.x) {
    for (std::uint32_t r = 0; r < b.x->reps.size(); ++r) {
      const RepetitionX& rep = b.x->reps[r];
      ByteWriter w;
      w.u32(r);
      detail::write_tree(w, rep.tree, rep.hashes);
      w.u64(rep.fingerprints.size());
      for (std::uint64_t f : rep.fingerprints) w.u64(f);
      detail::write_section(out, SectionTag::rep_x, w.str());
    }
  }
  return std::move(out.str());
}

inline IndexBundle load_index(std::string_view data) {
  ByteReader in(data);
  if (in.remaining() < sizeof kIndexMagic || std::memcmp(in.bytes(sizeof kIndexMagic).data(), kIndexMagic, 5) != 0)
    throw IndexFormatError("index: bad magic");
  IndexBundle b;
  {
    const std::uint32_t len = in.u32();
    const std::string_view raw = in.bytes(len);
    const auto want = checksum(raw);
    if (std::memcmp(in.bytes(32).data(), want.data(), 32) != 0) throw IndexFormatError("index: header checksum mismatch");
    ByteReader hr(raw);
    b.header = detail::read_header(hr);
    if (!hr.done()) throw IndexFormatError("index: trailing header bytes");
  }
  const IndexHeader& h = b.header;
  std::shared_ptr<const Text> text;
  {
    ByteReader r(detail::read_section(in, SectionTag::text));
    const std::uint32_t alpha = r.u32();
    const std::uint64_t n = r.count(4);
    if (n != h.shape.n_padded) throw IndexFormatError("index: stored text is not padded to the tree");
    std::vector<Symbol> s(n);
    for (auto& c : s) c = r.u32();
    if (!r.done()) throw IndexFormatError("index: trailing text bytes");
    try {
      text = std::make_shared<const Text>(Text(std::move(s), alpha));
    } catch (const UsageError& e) {
      throw IndexFormatError(std::string("index: ") + e.what());
    }
  }
  const ShiftSet universe = header_universe(h);
  if (h.side_has_y()) {
    YIndex y;
    y.header = h;
    y.text = text;
    std::map<ShiftedDistanceCache::Key, std::shared_ptr<const std::vector<std::uint32_t>>> shared;
    for (std::uint32_t rep = 0; rep < h.reps; ++rep) {
      ByteReader r(detail::read_section(in, SectionTag::rep_y));
      if (r.u32() != rep) throw IndexFormatError("index: repetitions out of order");
      RepetitionY ry;
      NodeHashes hashes;
      detail::read_tree(r, h, rep, ry.tree, hashes);
      ry.universe = universe;
      std::vector<std::vector<FingerprintEntry>> tables(ry.tree.size());
      for (auto& t : tables) {
        t.resize(r.count(16));
        for (auto& e : t) {
          e.fingerprint = r.u64();
          e.shift = r.i64();
        }
        for (std::size_t i = 1; i < t.size(); ++i)
          if (t[i - 1].fingerprint >= t[i].fingerprint) throw IndexFormatError("index: fingerprint table unsorted");
      }
      std::vector<ShiftedDistanceNode> nodes(ry.tree.size());
      for (const PrecisionNode& v : ry.tree.nodes()) {
        ShiftedDistanceNode& nd = nodes[v.id];
        nd.dense = r.u8() != 0;
        nd.cap = r.u32();
        nd.local.lo = r.i64();
        nd.local.hi = r.i64();
        nd.local.step = r.i64();
        if (!(nd.local == node_shifts(v, universe)) || nd.cap != ShiftedDistanceIndex::node_cap(v, universe))
          throw IndexFormatError("index: shifted-distance node does not match the tree");
        if (!nd.dense) continue;
        const std::uint64_t cnt = r.count(4);
        if (cnt != nd.local.size() * universe.size()) throw IndexFormatError("index: dense block size mismatch");
        std::vector<std::uint32_t> vals(cnt);
        for (auto& x : vals) x = r.u32();
        const ShiftedDistanceCache::Key key{v.range_start, v.range_len, nd.local.step, universe.hi, nd.cap};
        auto it = shared.find(key);
        if (it != shared.end() && *it->second == vals) {
          nd.values = it->second;
        } else {
          nd.values = std::make_shared<const std::vector<std::uint32_t>>(std::move(vals));
          shared[key] = nd.values;
        }
      }
      if (!r.done()) throw IndexFormatError("index: trailing repetition bytes");
      ry.matching = MatchingIndex(std::move(hashes), std::move(tables));
      ry.distances = ShiftedDistanceIndex(text, universe, std::move(nodes));
      y.stats.nodes += ry.tree.size();
      y.stats.dense_cells += ry.distances.dense_cells();
      y.reps.push_back(std::move(ry));
    }
    b.y = std::move(y);
  }
  if (h.side_has_x()) {
    XIndex x;
    x.header = h;
    x.text = text;
    for (std::uint32_t rep = 0; rep < h.reps; ++rep) {
      ByteReader r(detail::read_section(in, SectionTag::rep_x));
      if (r.u32() != rep) throw IndexFormatError("index: repetitions out of order");
      RepetitionX rx;
      detail::read_tree(r, h, rep, rx.tree, rx.hashes);
      if (r.count(8) != rx.tree.size()) throw IndexFormatError("index: fingerprint count mismatch");
      rx.fingerprints.resize(rx.tree.size());
      for (auto& f : rx.fingerprints) f = r.u64();
      if (!r.done()) throw IndexFormatError("index: trailing repetition bytes");
      x.stats.nodes += rx.tree.size();
      x.reps.push_back(std::move(rx));
    }
    b.x = std::move(x);
  }
  if (!in.done()) throw IndexFormatError("index: trailing bytes after last section");
  return b;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw std::runtime_error("read failed: " + path.string());
  return data;
}

// Temp file in the target directory, then rename: readers never observe a
// partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  const std::filesystem::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot create " + tmp.string());
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    f.flush();
    if (!f) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename onto " + path.string());
  }
}

}  // namespace gapedit
