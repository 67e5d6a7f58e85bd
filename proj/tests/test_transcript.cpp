#include <gtest/gtest.h>

#include <random>

#include "quotemix/transcript.hpp"
#include "support.hpp"

using namespace quotemix;

namespace {

StepTranscript parse_fixture(const std::string& name) {
  return parse_transcript(qmtest::slurp(qmtest::fixture("transcripts/" + name)));
}

TranscriptErrorKind error_of(const std::string& name) {
  try {
    parse_fixture(name);
  } catch (const TranscriptError& e) {
    return e.kind();
  }
  ADD_FAILURE() << name << " parsed";
  return TranscriptErrorKind::missing_sentinel;
}

}  // namespace

TEST(Transcript, Dkny) {
  auto t = parse_fixture("ok_dkny.txt");
  ASSERT_EQ(t.step1_quotes.size(), 3u);
  EXPECT_EQ(t.starred.text(), "New York never sleeps.");
  EXPECT_EQ(t.starred.author(), "Popular saying");
  EXPECT_EQ(t.starred.rationale(), "restless energy that builds anticipation");
  ASSERT_EQ(t.step2_segmentation.segments.size(), 2u);
  EXPECT_EQ(t.step2_segmentation.segments[0], (Segment{"New York", true}));
  EXPECT_EQ(t.step2_segmentation.segments[1], (Segment{"never sleeps.", false}));
  ASSERT_EQ(t.step3_replacements.size(), 2u);
  const auto* chosen = t.chosen_replacement();
  ASSERT_NE(chosen, nullptr);
  EXPECT_TRUE(chosen->preferred);
  EXPECT_EQ(chosen->swaps, (std::vector<WordSwap>{{"New York", "DKNY"}}));
  EXPECT_EQ(t.step4_slogan, "DKNY never sleeps.");
  EXPECT_TRUE(t.sentinel_seen);
}

TEST(Transcript, MarkdownHeadersAndBracketedEditable) {
  auto t = parse_fixture("ok_orgain.txt");
  EXPECT_EQ(t.starred.text(), "Something wonderful is coming.");
  ASSERT_EQ(t.step2_segmentation.segments.size(), 3u);
  EXPECT_EQ(t.step2_segmentation.segments[1], (Segment{"wonderful", true}));
  EXPECT_FALSE(t.step2_segmentation.segments[0].editable);
  EXPECT_EQ(t.chosen_replacement()->swaps, (std::vector<WordSwap>{{"wonderful", "Organic"}}));
  EXPECT_EQ(t.step4_slogan, "Something Organic is coming!");
}

TEST(Transcript, InlineSegmentMarkersAndHyphenAuthor) {
  auto t = parse_fixture("ok_ge.txt");
  EXPECT_EQ(t.starred.text(), "The only thing we have to fear is fear itself.");
  EXPECT_EQ(t.starred.author(), "Franklin D. Roosevelt");
  ASSERT_EQ(t.step2_segmentation.segments.size(), 2u);
  EXPECT_EQ(t.step2_segmentation.segments[0], (Segment{"The only thing we have to fear is", false}));
  EXPECT_EQ(t.step2_segmentation.segments[1], (Segment{"fear itself.", true}));
  EXPECT_EQ(t.step4_slogan, "The only thing we have to fear is missing GE.");
}

TEST(Transcript, CurlyQuotesAndIndexedEditable) {
  auto t = parse_fixture("ok_apple_curly.txt");
  EXPECT_EQ(t.starred.text(), "Stay hungry, stay foolish.");
  ASSERT_EQ(t.step2_segmentation.segments.size(), 4u);
  EXPECT_TRUE(t.step2_segmentation.segments[1].editable);
  EXPECT_TRUE(t.step2_segmentation.segments[3].editable);
  EXPECT_FALSE(t.step2_segmentation.segments[0].editable);
  EXPECT_EQ(t.chosen_replacement()->swaps.size(), 2u);
  EXPECT_EQ(t.step4_slogan, "Stay bold, stay innovative, stay Apple.");
}

TEST(Transcript, FixedLabelAndInsertion) {
  auto t = parse_fixture("ok_whirlpool_insert.txt");
  EXPECT_EQ(t.step1_quotes.size(), 4u);
  EXPECT_EQ(t.starred.text(), "Home is where the heart is.");
  EXPECT_EQ(t.step2_segmentation.segments[0], (Segment{"Home", true}));
  EXPECT_EQ(t.step2_segmentation.segments[1], (Segment{"is where the heart is.", false}));
  EXPECT_EQ(t.chosen_replacement()->swaps, (std::vector<WordSwap>{{"", "Whirlpool"}}));
}

TEST(Transcript, EachMalformationHasItsOwnError) {
  EXPECT_EQ(error_of("bad_missing_sentinel.txt"), TranscriptErrorKind::missing_sentinel);
  EXPECT_EQ(error_of("bad_missing_step.txt"), TranscriptErrorKind::missing_step);
  EXPECT_EQ(error_of("bad_too_few_quotes.txt"), TranscriptErrorKind::too_few_quotes);
  EXPECT_EQ(error_of("bad_no_star.txt"), TranscriptErrorKind::no_starred_quote);
  EXPECT_EQ(error_of("bad_segmentation.txt"), TranscriptErrorKind::unparseable_segmentation);
  EXPECT_EQ(error_of("bad_empty_slogan.txt"), TranscriptErrorKind::empty_final_slogan);
}

TEST(Transcript, MissingStepNamesTheStep) {
  try {
    parse_fixture("bad_missing_step.txt");
    FAIL();
  } catch (const TranscriptError& e) {
    EXPECT_EQ(e.step(), 3);
    EXPECT_EQ(to_string(e.kind()), "missing-step");
    EXPECT_FALSE(e.raw().empty());
  }
}

TEST(Transcript, TextAfterSentinelIsIgnored) {
  auto raw = qmtest::slurp(qmtest::fixture("transcripts/ok_dkny.txt"));
  auto t = parse_transcript(raw + "\nStep 4 Remix Slogan: \"Something else.\"\n");
  EXPECT_EQ(t.step4_slogan, "DKNY never sleeps.");
}

TEST(Transcript, MinQuotesIsConfigurable) {
  auto raw = qmtest::slurp(qmtest::fixture("transcripts/ok_dkny.txt"));
  TranscriptOptions strict;
  strict.min_quotes = 4;
  EXPECT_THROW(parse_transcript(raw, strict), TranscriptError);
}

TEST(Transcript, RenderRoundTripsEveryFixture) {
  for (const char* name :
       {"ok_dkny.txt", "ok_orgain.txt", "ok_ge.txt", "ok_apple_curly.txt", "ok_whirlpool_insert.txt"}) {
    auto t = parse_fixture(name);
    auto rendered = render_transcript(t);
    EXPECT_EQ(parse_transcript(rendered), t) << name;
    EXPECT_EQ(render_transcript(parse_transcript(rendered)), rendered) << name;
  }
}

TEST(Transcript, WhitespaceAndCaseFuzz) {
  const auto raw = qmtest::slurp(qmtest::fixture("transcripts/ok_dkny.txt"));
  const auto expected = parse_transcript(raw);
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::string fuzzed;
    std::size_t pos = 0;
    while (pos < raw.size()) {
      auto nl = raw.find('\n', pos);
      std::string line = raw.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? raw.size() : nl + 1;
      if (line.rfind("Step ", 0) == 0 && rng() % 2) {
        for (std::size_t i = 0; i < line.size() && line[i] != ':'; ++i) {
          line[i] = static_cast<char>(rng() % 2 ? std::toupper(line[i]) : std::tolower(line[i]));
        }
      }
      fuzzed += std::string(rng() % 3, ' ') + line + std::string(rng() % 3, ' ') + "\n";
      if (rng() % 4 == 0) fuzzed += "\n";
    }
    EXPECT_EQ(parse_transcript(fuzzed), expected) << fuzzed;
  }
}
