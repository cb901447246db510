#include <gtest/gtest.h>

#include "ragbench/utf8.hpp"

namespace ragbench::utf8 {
namespace {

TEST(Utf8, LengthCountsScalarValues) {
  EXPECT_EQ(length("héllo"), 5u);
  EXPECT_EQ(length("日本語"), 3u);
  EXPECT_EQ(length("\xF0\x9F\x98\x80"), 1u);  // U+1F600
  EXPECT_EQ(length(""), 0u);
}

TEST(Utf8, RejectsMalformedSequences) {
  EXPECT_TRUE(is_valid("plain ascii"));
  EXPECT_FALSE(is_valid("\xC3"));              // truncated
  EXPECT_FALSE(is_valid("\xC0\xAF"));          // overlong
  EXPECT_FALSE(is_valid("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(is_valid("\xF4\x90\x80\x80"));  // > U+10FFFF
  EXPECT_EQ(sanitize("a\xFF" "b"), "a\xEF\xBF\xBD" "b");
}

TEST(Utf8, CaseFold) {
  EXPECT_EQ(case_fold("HeLLo"), "hello");
  EXPECT_EQ(case_fold("ÉCOLE"), "école");
  EXPECT_EQ(case_fold("ΑΒΓ"), "αβγ");
  EXPECT_EQ(case_fold("ПРИВЕТ"), "привет");
  EXPECT_EQ(case_fold("日本"), "日本");
}

TEST(Utf8, TruncateNeverSplitsAScalar) {
  EXPECT_EQ(truncate("héllo", 2), "hé");
  EXPECT_EQ(truncate("ab", 10), "ab");
}

TEST(Utf8, EncodeDecodeInverse) {
  const std::string s = "aé中\U0001F600z";
  EXPECT_EQ(encode(decode(s)), s);
  EXPECT_EQ(boundaries(s).size(), length(s) + 1);
}

}  // namespace
}  // namespace ragbench::utf8
