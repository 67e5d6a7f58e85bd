#include <gtest/gtest.h>

#include <set>

#include "quotemix/domain.hpp"
#include "quotemix/hash.hpp"
#include "quotemix/prompts.hpp"
#include "quotemix/roster.hpp"
#include "support.hpp"

using namespace quotemix;

TEST(Labels, RoundTripAndCaseInsensitive) {
  for (Domain d : kAllDomains) EXPECT_EQ(parse_domain(to_string(d)), d);
  for (PersonaLabel p : kAllPersonas) EXPECT_EQ(parse_persona_label(to_string(p)), p);
  EXPECT_EQ(parse_domain("ELECTRONICS"), Domain::electronics);
  EXPECT_EQ(parse_persona_label("anticipation"), PersonaLabel::Anticipation);
  EXPECT_THROW(parse_domain("toys"), InvalidArgument);
  EXPECT_THROW(parse_persona_label("Envy"), InvalidArgument);
}

TEST(NormalizeWords, LowercasesAndStripsEdgePunctuation) {
  EXPECT_EQ(normalize_words("Stay hungry, stay foolish."),
            (std::vector<std::string>{"stay", "hungry", "stay", "foolish"}));
  EXPECT_EQ(normalize_words("  \"DKNY\"   never -- sleeps!  "),
            (std::vector<std::string>{"dkny", "never", "sleeps"}));
  EXPECT_EQ(normalize_words("Levi's La-Z-Boy"), (std::vector<std::string>{"levi's", "la-z-boy"}));
  EXPECT_TRUE(normalize_words(" ... ").empty());
  EXPECT_EQ(normalize_whitespace("  a \t b\n c "), "a b c");
}

TEST(QuoteBoundsCheck, SoftAndHardLimits) {
  Quote ok("Something wonderful is coming today.", "Saying");
  EXPECT_TRUE(ok.within_soft_bounds());
  EXPECT_EQ(ok.word_count(), 5u);
  Quote short_one("Think different.", "Apple");
  EXPECT_FALSE(short_one.within_soft_bounds());
  EXPECT_THROW(Quote("Hi.", "Someone"), InvalidArgument);
  EXPECT_THROW(Quote("A perfectly fine quote here.", ""), InvalidArgument);
  std::string long_text;
  for (int i = 0; i < 26; ++i) long_text += "word ";
  EXPECT_THROW(Quote(long_text, "Someone"), InvalidArgument);
}

TEST(Segmentation, ReconstructionAndEditability) {
  Quote q("New York never sleeps.", "Saying");
  QuoteSegmentation good{{{"New York", true}, {"never sleeps.", false}}, q};
  EXPECT_TRUE(validate_segmentation(good).ok());
  EXPECT_EQ(good.joined(), "New York never sleeps.");

  QuoteSegmentation mismatch{{{"New York", true}, {"always sleeps.", false}}, q};
  EXPECT_TRUE(validate_segmentation(mismatch).has(SegmentationIssue::reconstruction_mismatch));

  QuoteSegmentation no_edit{{{"New York", false}, {"never sleeps.", false}}, q};
  EXPECT_TRUE(validate_segmentation(no_edit).has(SegmentationIssue::no_editable_segment));

  QuoteSegmentation no_fixed{{{"New York", true}, {"never sleeps.", true}}, q};
  EXPECT_TRUE(validate_segmentation(no_fixed).has(SegmentationIssue::no_fixed_segment));
}

TEST(Candidate, RemixInvariants) {
  Brand dkny("DKNY", Domain::clothing, {"new york"});
  Persona p(PersonaLabel::Anticipation, "g");
  SloganCandidate ok("DKNY never sleeps.", dkny, p, SourceMethod::remix());
  EXPECT_TRUE(ok.invariant_violations().empty());
  SloganCandidate no_punct("DKNY never sleeps", dkny, p, SourceMethod::remix());
  EXPECT_FALSE(no_punct.invariant_violations().empty());
  SloganCandidate no_brand("Paris never sleeps.", dkny, p, SourceMethod::remix());
  EXPECT_FALSE(no_brand.invariant_violations().empty());
  SloganCandidate baseline("whatever", dkny, p, SourceMethod::baseline("baseline"));
  EXPECT_TRUE(baseline.invariant_violations().empty());
}

TEST(Candidate, BrandMentionUsesKeywordsAsWordSequences) {
  Brand orgain("Orgain", Domain::nutrition, {"organic", "protein"});
  EXPECT_TRUE(mentions_brand("Something Organic is coming!", orgain));
  EXPECT_TRUE(mentions_brand("ORGAIN rocks.", orgain));
  EXPECT_FALSE(mentions_brand("Organically grown.", orgain));
  Brand dkny("DKNY", Domain::clothing, {"new york"});
  EXPECT_TRUE(mentions_brand("New York, new you.", dkny));
  EXPECT_FALSE(mentions_brand("York is new.", dkny));
  EXPECT_TRUE(ends_with_terminal_punctuation("Go!"));
  EXPECT_TRUE(ends_with_terminal_punctuation("Really?\""));
  EXPECT_FALSE(ends_with_terminal_punctuation("Go"));
}

TEST(Roster, ShippedRosterCoversEveryDomainAndPersona) {
  auto roster = qmtest::default_roster();
  EXPECT_EQ(roster.brands().size(), 40u);
  EXPECT_EQ(roster.personas().size(), 5u);
  std::set<Domain> domains;
  for (const auto& b : roster.brands()) domains.insert(b.domain());
  EXPECT_EQ(domains.size(), 8u);
  for (const auto& p : roster.personas()) EXPECT_FALSE(p.guideline().empty());
  EXPECT_EQ(roster.cells().size(), 200u);
  EXPECT_TRUE(roster.find_brand("dkny").has_value());
  EXPECT_TRUE(roster.find_persona("joy").has_value());
  EXPECT_FALSE(roster.find_brand("Nokia").has_value());
}

TEST(Roster, JsonRoundTripAndRejections) {
  auto roster = qmtest::default_roster();
  auto again = roster_from_json(roster_to_json(roster));
  EXPECT_EQ(again.brands(), roster.brands());
  EXPECT_EQ(again.personas(), roster.personas());

  nlohmann::json bad_domain = {{"brands", {{{"name", "X"}, {"domain", "toys"}}}}, {"personas", nlohmann::json::array()}};
  EXPECT_THROW(roster_from_json(bad_domain), Error);
  nlohmann::json bad_persona = {{"brands", nlohmann::json::array()}, {"personas", {{{"label", "Envy"}}}}};
  EXPECT_THROW(roster_from_json(bad_persona), Error);
}

TEST(Prompts, RemixCardRendersCell) {
  Brand dkny("DKNY", Domain::clothing);
  Persona p(PersonaLabel::Anticipation, "Build excitement about what comes next.");
  auto prompt = build_remix_prompt(dkny, p);
  EXPECT_EQ(prompt.template_version, "remix.v1");
  EXPECT_NE(prompt.rendered.find("DKNY"), std::string::npos);
  EXPECT_NE(prompt.rendered.find("Anticipation"), std::string::npos);
  EXPECT_NE(prompt.rendered.find("Build excitement about what comes next."), std::string::npos);
  EXPECT_EQ(prompt.rendered.find("{Brand}"), std::string::npos);
  EXPECT_EQ(build_remix_prompt(dkny, p).rendered, prompt.rendered);
  EXPECT_THROW(build_remix_prompt(dkny, Persona(PersonaLabel::Joy)), MissingGuideline);
}

TEST(Prompts, SubstitutionIsSinglePass) {
  EXPECT_EQ(render_template("{A} and {B}", {{"A", "{B}"}, {"B", "x"}}), "{B} and x");
  EXPECT_THROW(render_template("{Missing}", {}), TemplateError);
  auto versions = template_versions();
  for (const char* name : {"remix", "fluency", "faithfulness", "hook", "baseline", "refine"}) {
    EXPECT_TRUE(versions.count(name)) << name;
  }
  EXPECT_THROW(prompt_template("nope"), InvalidArgument);
}

TEST(Hash, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}
