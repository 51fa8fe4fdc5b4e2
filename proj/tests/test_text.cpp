#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "argmine/alignment.hpp"
#include "argmine/csv.hpp"
#include "argmine/labels.hpp"
#include "argmine/text.hpp"

namespace argmine {
namespace {

TEST(Labels, ArgTypeParsingIsCaseInsensitiveAndCanonicalOnOutput) {
  EXPECT_EQ(parse_arg_type("concluding statement"), ArgType::kConcludingStatement);
  EXPECT_EQ(parse_arg_type("Concluding Statement"), ArgType::kConcludingStatement);
  EXPECT_EQ(parse_arg_type("ConcludingStatement"), ArgType::kConcludingStatement);
  EXPECT_EQ(parse_arg_type(" COUNTERCLAIM "), ArgType::kCounterclaim);
  EXPECT_EQ(to_string(ArgType::kConcludingStatement), "Concluding Statement");
  for (ArgType t : kAllArgTypes) EXPECT_EQ(parse_arg_type(to_string(t)), t);
  EXPECT_EQ(kAllArgTypes.size(), 7u);
}

TEST(Labels, QualityIsAClosedSet) {
  EXPECT_EQ(kAllQualityLabels.size(), 3u);
  EXPECT_EQ(parse_quality("adequate"), QualityLabel::kAdequate);
  EXPECT_THROW(parse_quality("Good"), LabelError);
  EXPECT_THROW(parse_arg_type("Thesis"), LabelError);
  EXPECT_FALSE(try_parse_quality("").has_value());
}

TEST(Labels, TaskKinds) {
  EXPECT_EQ(parse_task_kind("joint"), TaskKind::kTypeAndQuality);
  EXPECT_EQ(parse_task_kind("type"), TaskKind::kTypeOnly);
  EXPECT_THROW(parse_task_kind("summary"), std::invalid_argument);
}

TEST(Tokenize, SplitsOnWhitespaceWithOffsets) {
  const std::string text = "Hi, i'm Isaac";
  const auto tokens = tokenize(text);
  ASSERT_EQ(tokens.size(), 3u);
  EXPECT_EQ(tokens[0], (Token{0, 3}));
  EXPECT_EQ(tokens[1], (Token{4, 7}));
  EXPECT_EQ(tokens[2], (Token{8, 13}));
}

TEST(Tokenize, EmptyAndBlankInputs) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n ").empty());
  EXPECT_TRUE(is_blank(" \n\t"));
  EXPECT_FALSE(is_blank(" x "));
}

TEST(Tokenize, UnicodeWhitespaceSeparates) {
  // U+00A0 no-break space, U+2003 em space, U+3000 ideographic space.
  const std::string text = "a\xC2\xA0" "b\xE2\x80\x83" "c\xE3\x80\x80" "d";
  const auto tokens = tokenize(text);
  ASSERT_EQ(tokens.size(), 4u);
  EXPECT_EQ(text.substr(tokens[3].begin, tokens[3].size()), "d");
}

TEST(Tokenize, NonWhitespaceMultibyteStaysInsideTokens) {
  const std::string text = "caf\xC3\xA9 na\xC3\xAFve";
  const auto tokens = tokenize(text);
  ASSERT_EQ(tokens.size(), 2u);
  EXPECT_EQ(tokens[0], (Token{0, 5}));
}

TEST(Tokenize, OffsetsReconstructTheText) {
  std::mt19937 rng(7);
  const std::vector<std::string> pieces = {"a", "bb", "ccc", " ", "\t", "\n", "  ", "\xC2\xA0", "x.y"};
  for (int round = 0; round < 200; ++round) {
    std::string text;
    for (int k = 0, n = static_cast<int>(rng() % 30); k < n; ++k) text += pieces[rng() % pieces.size()];
    const auto tokens = tokenize(text);
    std::string rebuilt;
    std::size_t at = 0;
    for (std::size_t k = 0; k < tokens.size(); ++k) {
      ASSERT_LT(tokens[k].begin, tokens[k].end);
      if (k > 0) ASSERT_GT(tokens[k].begin, tokens[k - 1].end);
      rebuilt += text.substr(at, tokens[k].begin - at);
      rebuilt += text.substr(tokens[k].begin, tokens[k].size());
      ASSERT_TRUE(is_blank(text.substr(at, tokens[k].begin - at)));
      at = tokens[k].end;
    }
    rebuilt += text.substr(at);
    ASSERT_TRUE(is_blank(text.substr(at)));
    EXPECT_EQ(rebuilt, text);
  }
}

TEST(Tokenize, CountMatchesWordCountStyleSplitOnFixture) {
  // Same count as a plain split on spaces, tabs and newlines.
  const std::string text = "First line\twith tabs\n\nsecond  paragraph ends.\n";
  EXPECT_EQ(tokenize(text).size(), 7u);
}

TEST(CollapseWhitespace, CollapsesAndTrims) {
  EXPECT_EQ(collapse_whitespace("  a \t b\n\nc  "), "a b c");
  EXPECT_EQ(collapse_whitespace(""), "");
}

TEST(Csv, QuotedFieldsAndLineNumbers) {
  const std::string text =
      "\xEF\xBB\xBF" "a,b,c\r\n1,\"x, y\",\"say \"\"hi\"\"\"\r\n\n2,\"multi\nline\",z\n";
  const auto rows = csv::parse(text);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].fields, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(rows[1].fields[1], "x, y");
  EXPECT_EQ(rows[1].fields[2], "say \"hi\"");
  EXPECT_EQ(rows[2].line, 4u);
  EXPECT_EQ(rows[2].fields[1], "multi\nline");
}

TEST(Csv, UnterminatedQuoteIsAnError) {
  EXPECT_THROW(csv::parse("a,b\n\"open,1\n"), csv::ParseError);
}

TEST(Csv, EscapeRoundTrips) {
  for (const std::string field : {"plain", "with,comma", "with \"quote\"", "line\nbreak", ""}) {
    const auto rows = csv::parse(csv::escape(field) + ",end\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].fields[0], field);
  }
}

std::vector<std::string_view> views(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

TEST(Alignment, IdenticalSequencesAlignDiagonally) {
  const std::vector<std::string> a = {"the", "cat", "sat"};
  const auto va = views(a);
  const TokenAlignment al = align_tokens(va, va);
  EXPECT_EQ(al.distance, 0u);
  EXPECT_EQ(al.target_to_source, (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(al.source_to_target, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Alignment, SubstitutionDeletionInsertion) {
  const std::vector<std::string> src = {"we", "descovered", "life", "on", "mars"};
  const std::vector<std::string> fixed = {"we", "discovered", "life", "on", "mars"};
  EXPECT_EQ(align_tokens(views(src), views(fixed)).distance, 1u);

  const std::vector<std::string> dropped = {"we", "life", "on", "mars"};
  const TokenAlignment del = align_tokens(views(src), views(dropped));
  EXPECT_EQ(del.distance, 1u);
  // Target boundary 1 ("after we") projects to the furthest source boundary.
  EXPECT_EQ(del.target_to_source[1], 2u);

  const std::vector<std::string> extra = {"we", "really", "descovered", "life", "on", "mars"};
  const TokenAlignment ins = align_tokens(views(src), views(extra));
  EXPECT_EQ(ins.distance, 1u);
  EXPECT_EQ(ins.target_to_source[2], 1u);
  EXPECT_EQ(ins.target_to_source[6], 5u);
}

TEST(Alignment, EmptySides) {
  const std::vector<std::string> a = {"x", "y"};
  const std::vector<std::string> none;
  EXPECT_EQ(align_tokens(views(a), views(none)).distance, 2u);
  EXPECT_EQ(align_tokens(views(none), views(a)).distance, 2u);
  EXPECT_EQ(align_tokens(views(none), views(a)).target_to_source, (std::vector<std::size_t>{0, 0, 0}));
}

}  // namespace
}  // namespace argmine
