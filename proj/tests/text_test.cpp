#include <gtest/gtest.h>

#include "gapedit/text.hpp"

using namespace gapedit;

namespace {

Text abc() { return Text({0, 1, 2}, 3); }

}  // namespace

TEST(Text, IndexingAndBottom) {
  const Text t = abc();
  EXPECT_EQ(t.at(1), 1u);
  EXPECT_EQ(t.at(-1), kBottom);
  EXPECT_EQ(t.at(3), kBottom);
}

TEST(Text, WindowsClampWithBottom) {
  const Text t = abc();
  EXPECT_EQ(materialize(Window(t, 0, 3)), (std::vector<Symbol>{0, 1, 2}));
  EXPECT_EQ(materialize(Window(t, 2, 3)), (std::vector<Symbol>{2, kBottom, kBottom}));
  EXPECT_EQ(materialize(Window(t, -1, 2)), (std::vector<Symbol>{kBottom, 0}));
  EXPECT_TRUE(Window(t, 0, 3).inside());
  EXPECT_FALSE(Window(t, -1, 2).inside());
}

TEST(Text, Hamming) {
  const Text a = Text::from_bytes("abc"), b = Text::from_bytes("abd");
  EXPECT_EQ(hamming(a, b), 1u);
  EXPECT_EQ(hamming(a, a), 0u);
  // two BOTTOMs against real symbols
  const Text ab = Text::from_bytes("ab"), abcd = Text::from_bytes("abcd");
  EXPECT_EQ(hamming(Window(ab, 0, 4), abcd), 2u);
  EXPECT_THROW(hamming(a, abcd), UsageError);
}

TEST(Text, SymbolsOutsideAlphabetRejected) {
  EXPECT_THROW(Text({0, 3}, 3), UsageError);
  EXPECT_THROW(Text({}, 0), UsageError);
  EXPECT_NO_THROW(Text({0, kPad}, 3));
}

TEST(Text, Utf8DecodesCodePoints) {
  const Text t = Text::from_utf8("a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80");
  EXPECT_EQ(materialize(t), (std::vector<Symbol>{'a', 0xE9, 0x20AC, 0x1F600}));
  EXPECT_EQ(t.alphabet_size(), 0x110000u);
  EXPECT_THROW(Text::from_utf8("\xC3"), UsageError);
  EXPECT_THROW(Text::from_utf8("\xC3\x28"), UsageError);
  EXPECT_THROW(Text::from_utf8("\xFF"), UsageError);
}

TEST(Text, BytesAreIdentityCoded) {
  const Text t = Text::from_bytes(std::string("\x00\xff", 2));
  EXPECT_EQ(t[0], 0u);
  EXPECT_EQ(t[1], 255u);
  EXPECT_EQ(Text::decode("xy", AlphabetKind::bytes), Text::from_bytes("xy"));
}

TEST(Text, PaddingAppendsPad) {
  const Text p = abc().padded_to(5);
  EXPECT_EQ(p.size(), 5u);
  EXPECT_EQ(p[3], kPad);
  EXPECT_EQ(p.at(5), kBottom);
  EXPECT_THROW(abc().padded_to(2), UsageError);
}
