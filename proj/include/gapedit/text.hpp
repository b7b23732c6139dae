#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gapedit {

using Symbol = std::uint32_t;

// Produced only by out-of-range reads; never stored.
inline constexpr Symbol kBottom = 0xFFFFFFFFu;
// Appended to both strings when padding to the tree size.
inline constexpr Symbol kPad = 0xFFFFFFFEu;
inline constexpr Symbol kMaxAlphabet = 0xFFFFFFF0u;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <class S>
concept SymbolSource = requires(const S& s, std::size_t i) {
  { s.size() } -> std::convertible_to<std::size_t>;
  { s[i] } -> std::convertible_to<Symbol>;
};

enum class AlphabetKind : std::uint8_t { bytes = 0, utf8 = 1 };

inline std::string_view to_string(AlphabetKind k) {
  return k == AlphabetKind::bytes ? "bytes" : "utf8";
}

class Text {
 public:
  Text() = default;

  Text(std::vector<Symbol> symbols, Symbol alphabet_size)
      : symbols_(std::move(symbols)), alphabet_size_(alphabet_size) {
    if (alphabet_size_ == 0 || alphabet_size_ > kMaxAlphabet)
      throw UsageError("alphabet size out of range");
    for (Symbol s : symbols_)
      if (s >= alphabet_size_ && s != kPad)
        throw UsageError("symbol outside alphabet");
  }

  // Identity coding: byte value or code point is the symbol id. Both sides of
  // a two-sided index code independently, so the map must not depend on content.
  static Text from_bytes(std::string_view bytes) {
    std::vector<Symbol> s(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i)
      s[i] = static_cast<unsigned char>(bytes[i]);
    return Text(std::move(s), 256);
  }

  static Text from_utf8(std::string_view bytes) {
    std::vector<Symbol> out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    while (i < bytes.size()) {
      auto b0 = static_cast<unsigned char>(bytes[i]);
      int extra = b0 < 0x80 ? 0 : (b0 >> 5) == 0x6 ? 1 : (b0 >> 4) == 0xE ? 2 : (b0 >> 3) == 0x1E ? 3 : -1;
      if (extra < 0) throw UsageError("invalid UTF-8 at byte " + std::to_string(i));
      if (i + static_cast<std::size_t>(extra) >= bytes.size())
        throw UsageError("truncated UTF-8 at byte " + std::to_string(i));
      Symbol cp = extra == 0 ? b0 : extra == 1 ? (b0 & 0x1F) : extra == 2 ? (b0 & 0x0F) : (b0 & 0x07);
      for (int e = 1; e <= extra; ++e) {
        auto b = static_cast<unsigned char>(bytes[i + e]);
        if ((b & 0xC0) != 0x80) throw UsageError("invalid UTF-8 continuation at byte " + std::to_string(i + e));
        cp = (cp << 6) | (b & 0x3F);
      }
      if (cp >= 0x110000) throw UsageError("code point out of range");
      out.push_back(cp);
      i += 1 + extra;
    }
    return Text(std::move(out), 0x110000);
  }

  static Text decode(std::string_view bytes, AlphabetKind kind) {
    return kind == AlphabetKind::bytes ? from_bytes(bytes) : from_utf8(bytes);
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Symbol alphabet_size() const noexcept { return alphabet_size_; }
  std::span<const Symbol> symbols() const noexcept { return symbols_; }

  Symbol operator[](std::size_t i) const noexcept { return symbols_[i]; }

  Symbol at(std::int64_t i) const noexcept {
    return i >= 0 && static_cast<std::uint64_t>(i) < symbols_.size() ? symbols_[static_cast<std::size_t>(i)]
                                                                     : kBottom;
  }

  // Copy extended with PAD up to `length` (no-op if already that long).
  Text padded_to(std::size_t length) const {
    if (length < symbols_.size()) throw UsageError("padding shorter than text");
    std::vector<Symbol> s = symbols_;
    s.resize(length, kPad);
    Text t;
    t.symbols_ = std::move(s);
    t.alphabet_size_ = alphabet_size_;
    return t;
  }

  friend bool operator==(const Text& a, const Text& b) {
    return a.alphabet_size_ == b.alphabet_size_ && a.symbols_ == b.symbols_;
  }

 private:
  std::vector<Symbol> symbols_;
  Symbol alphabet_size_ = 256;
};

inline Symbol read_at(const Text& text, std::int64_t index) noexcept { return text.at(index); }

// X[start .. start+len) with out-of-range positions reading as BOTTOM.
class Window {
 public:
  Window(const Text& text, std::int64_t start, std::size_t len) noexcept : text_(&text), start_(start), len_(len) {}

  std::size_t size() const noexcept { return len_; }
  std::int64_t start() const noexcept { return start_; }
  const Text& text() const noexcept { return *text_; }
  Symbol operator[](std::size_t p) const noexcept { return text_->at(start_ + static_cast<std::int64_t>(p)); }

  // True when no position reads out of range.
  bool inside() const noexcept {
    return start_ >= 0 && static_cast<std::uint64_t>(start_) + len_ <= text_->size();
  }

 private:
  const Text* text_;
  std::int64_t start_;
  std::size_t len_;
};

inline Window window(const Text& text, std::int64_t start, std::size_t len) noexcept { return {text, start, len}; }

// Wraps any contiguous symbol storage as a SymbolSource.
struct SymbolSpan {
  std::span<const Symbol> data;
  std::size_t size() const noexcept { return data.size(); }
  Symbol operator[](std::size_t i) const noexcept { return data[i]; }
};

template <SymbolSource A, SymbolSource B>
std::size_t hamming(const A& a, const B& b) {
  if (a.size() != b.size()) throw UsageError("hamming: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

template <SymbolSource S>
std::vector<Symbol> materialize(const S& s) {
  std::vector<Symbol> out(s.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s[i];
  return out;
}

}  // namespace gapedit
