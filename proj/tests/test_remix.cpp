#include <gtest/gtest.h>

#include <set>

#include "quotemix/mock_backend.hpp"
#include "quotemix/prompts.hpp"
#include "quotemix/remix.hpp"
#include "support.hpp"

using namespace quotemix;

namespace {

const Brand kOrgain("Orgain", Domain::nutrition, {"organic", "protein"});
const Brand kDkny("DKNY", Domain::clothing, {"new york"});
const Brand kGe("GE", Domain::appliance);
const Persona kAnticipation(PersonaLabel::Anticipation, "Build excitement about what is coming next.");
const Persona kFear(PersonaLabel::Fear, "Name a worry and resolve it.");

std::string transcript(const std::string& name) { return qmtest::slurp(qmtest::fixture("transcripts/" + name)); }

Gateway gateway_for(std::shared_ptr<ChatBackend> backend) {
  GatewayOptions o;
  o.retry.max_attempts = 2;
  o.retry.base_delay_ms = 1;
  return Gateway(std::move(backend), o, std::make_shared<SimulatedClock>());
}

// Returns responses in call order; the last one repeats.
std::shared_ptr<qmtest::FnBackend> sequence(std::vector<std::string> replies) {
  return std::make_shared<qmtest::FnBackend>([replies](const ChatRequest&, int call) {
    return BackendReply{replies[std::min<std::size_t>(call - 1, replies.size() - 1)], {}};
  });
}

// Remix prompts get `remix`, refinement prompts get `refine`.
std::shared_ptr<qmtest::FnBackend> with_refiner(std::string remix, std::string refine) {
  return std::make_shared<qmtest::FnBackend>([=](const ChatRequest& req, int) {
    const bool is_refine = req.user_text.find("final polish pass") != std::string::npos;
    return BackendReply{is_refine ? refine : remix, {}};
  });
}

}  // namespace

TEST(RunRemix, AcceptsWellFormedTranscript) {
  auto backend = sequence({transcript("ok_orgain.txt")});
  auto gw = gateway_for(backend);
  auto r = run_remix(kOrgain, kAnticipation, gw, RemixConfig{}, 7);
  EXPECT_EQ(r.candidate.text(), "Something Organic is coming!");
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(r.nonce, 7u);
  EXPECT_TRUE(r.discards.empty());
  ASSERT_EQ(r.cache_keys.size(), 1u);
  EXPECT_EQ(r.cache_keys[0].size(), 64u);
  EXPECT_EQ(r.report.overall, RuleVerdict::pass);
  ASSERT_TRUE(r.candidate.trace().has_value());
  EXPECT_EQ(r.candidate.trace()->starred_quote.text(), "Something wonderful is coming.");
  EXPECT_TRUE(r.candidate.trace()->invariant_violations().empty());
  EXPECT_TRUE(r.candidate.invariant_violations().empty());

  auto prompts = backend->prompts();
  ASSERT_EQ(prompts.size(), 1u);
  EXPECT_EQ(prompts[0], build_remix_prompt(kOrgain, kAnticipation).rendered + nonce_tail(7));
}

TEST(RunRemix, GeSloganSurvivesFirstPersonScoping) {
  auto gw = gateway_for(sequence({transcript("ok_ge.txt")}));
  auto r = run_remix(kGe, kFear, gw, RemixConfig{});
  EXPECT_EQ(r.candidate.text(), "The only thing we have to fear is missing GE.");
}

TEST(RunRemix, RetriesMalformedOutputWithFreshNonces) {
  auto backend = sequence({transcript("bad_no_star.txt"), transcript("ok_dkny.txt")});
  auto gw = gateway_for(backend);
  auto r = run_remix(kDkny, kAnticipation, gw, RemixConfig{}, 10);
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(r.nonce, 11u);
  ASSERT_EQ(r.discards.size(), 1u);
  EXPECT_EQ(r.discards[0].reason, "no-starred-quote");
  EXPECT_EQ(r.discards[0].nonce, 10u);
  auto prompts = backend->prompts();
  ASSERT_EQ(prompts.size(), 2u);
  EXPECT_NE(prompts[0], prompts[1]);
  EXPECT_NE(prompts[1].find("[sample 11]"), std::string::npos);
}

TEST(RunRemix, ExhaustsAfterRetryCap) {
  auto backend = sequence({transcript("bad_missing_sentinel.txt")});
  auto gw = gateway_for(backend);
  RemixConfig cfg;
  cfg.retry_cap = 2;
  try {
    run_remix(kDkny, kAnticipation, gw, cfg);
    FAIL();
  } catch (const PipelineExhausted& e) {
    EXPECT_EQ(e.attempts(), 2);
    ASSERT_EQ(e.discards().size(), 2u);
    for (const auto& d : e.discards()) EXPECT_EQ(d.reason, "missing-sentinel");
  }
  EXPECT_EQ(backend->calls(), 2);
}

TEST(RunRemix, ConstraintFailureIsDiscardedWithReport) {
  // The Orgain transcript does not mention DKNY.
  auto gw = gateway_for(sequence({transcript("ok_orgain.txt")}));
  RemixConfig cfg;
  cfg.retry_cap = 1;
  try {
    run_remix(kDkny, kAnticipation, gw, cfg);
    FAIL();
  } catch (const PipelineExhausted& e) {
    ASSERT_EQ(e.discards().size(), 1u);
    EXPECT_EQ(e.discards()[0].reason, "constraints");
    ASSERT_TRUE(e.discards()[0].report.has_value());
    EXPECT_EQ(e.discards()[0].report->rule("brand")->verdict, RuleVerdict::fail);
  }
}

TEST(RunRemix, GatewayErrorsKeepKindAndNameTheStage) {
  auto backend = std::make_shared<qmtest::FnBackend>(
      [](const ChatRequest&, int) -> BackendReply { throw GatewayError(GatewayErrorKind::auth, "denied"); });
  auto gw = gateway_for(backend);
  try {
    run_remix(kDkny, kAnticipation, gw, RemixConfig{});
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::auth);
    EXPECT_NE(std::string(e.what()).find("remix/generate"), std::string::npos);
  }
}

TEST(Refine, KeepLeavesSloganUnchanged) {
  auto backend = with_refiner(transcript("ok_dkny.txt"), "Verdict: KEEP\nSlogan: \"DKNY never sleeps.\"\nReason: ok");
  auto gw = gateway_for(backend);
  RemixConfig cfg;
  cfg.refine = true;
  auto r = run_remix(kDkny, kAnticipation, gw, cfg);
  EXPECT_EQ(r.candidate.text(), "DKNY never sleeps.");
  ASSERT_TRUE(r.refinement.has_value());
  EXPECT_EQ(r.refinement->verdict, RefineOutcome::Verdict::keep);
  EXPECT_EQ(r.cache_keys.size(), 2u);
  EXPECT_NE(backend->prompts()[1].find("New York never sleeps."), std::string::npos);
}

TEST(Refine, ValidRevisionReplacesSlogan) {
  auto gw = gateway_for(
      with_refiner(transcript("ok_dkny.txt"), "Verdict: REVISE\nSlogan: \"DKNY never rests.\"\nReason: crisper"));
  RemixConfig cfg;
  cfg.refine = true;
  auto r = run_remix(kDkny, kAnticipation, gw, cfg);
  EXPECT_EQ(r.candidate.text(), "DKNY never rests.");
  EXPECT_EQ(r.transcript.step4_slogan, "DKNY never rests.");
  EXPECT_EQ(r.report.edit_count, 2u);
}

TEST(Refine, InvalidRevisionKeepsOriginalWithAdvisory) {
  auto gw = gateway_for(
      with_refiner(transcript("ok_dkny.txt"), "Verdict: REVISE\nSlogan: \"We never sleep\"\nReason: warmer"));
  RemixConfig cfg;
  cfg.refine = true;
  auto r = run_remix(kDkny, kAnticipation, gw, cfg);
  EXPECT_EQ(r.candidate.text(), "DKNY never sleeps.");
  EXPECT_FALSE(r.report.advisories.empty());
  EXPECT_EQ(r.report.overall, RuleVerdict::warn);
}

TEST(Refine, DiscardConsumesTheAttempt) {
  auto gw = gateway_for(with_refiner(transcript("ok_dkny.txt"), "Verdict: DISCARD\nSlogan: \"\"\nReason: unsafe"));
  RemixConfig cfg;
  cfg.refine = true;
  cfg.retry_cap = 2;
  try {
    run_remix(kDkny, kAnticipation, gw, cfg);
    FAIL();
  } catch (const PipelineExhausted& e) {
    ASSERT_EQ(e.discards().size(), 2u);
    EXPECT_EQ(e.discards()[0].reason, "refine-discard");
    EXPECT_EQ(e.discards()[0].detail, "unsafe");
  }
}

TEST(Refine, UnparsedAnswerKeepsSlogan) {
  auto gw = gateway_for(with_refiner(transcript("ok_dkny.txt"), "Looks great to me!"));
  RemixConfig cfg;
  cfg.refine = true;
  auto r = run_remix(kDkny, kAnticipation, gw, cfg);
  EXPECT_EQ(r.candidate.text(), "DKNY never sleeps.");
  EXPECT_EQ(r.refinement->verdict, RefineOutcome::Verdict::unparsed);
  EXPECT_EQ(r.report.overall, RuleVerdict::warn);
}

TEST(Refine, ParseOutput) {
  auto a = parse_refine_output("**Verdict:** revise\nSlogan: “New line.”\nReason: tighter");
  EXPECT_EQ(a.verdict, RefineOutcome::Verdict::revise);
  EXPECT_EQ(a.slogan, "New line.");
  EXPECT_EQ(a.reason, "tighter");
  EXPECT_EQ(parse_refine_output("Verdict: REVISE\nReason: no slogan").verdict, RefineOutcome::Verdict::unparsed);
  EXPECT_EQ(parse_refine_output("Verdict: maybe").verdict, RefineOutcome::Verdict::unparsed);
}

TEST(GenerateCell, MockYieldsDistinctSlogans) {
  auto mock = mock_script(load_mock_script(qmtest::fixture("mock/mock.json")));
  auto gw = gateway_for(mock);
  auto cell = generate_cell(kDkny, kAnticipation, 3, gw, RemixConfig{}, 100);
  ASSERT_FALSE(cell.shortfall) << *cell.shortfall;
  ASSERT_EQ(cell.slogans.size(), 3u);
  std::set<std::vector<std::string>> distinct;
  for (const auto& s : cell.slogans) {
    distinct.insert(normalize_words(s.text()));
    EXPECT_TRUE(mentions_brand(s.text(), kDkny));
  }
  EXPECT_EQ(distinct.size(), 3u);
  EXPECT_EQ(cell.cache_keys.size(), 3u);
  EXPECT_EQ(cell.reports.size(), 3u);
  std::set<std::uint64_t> nonces(cell.nonces.begin(), cell.nonces.end());
  EXPECT_EQ(nonces.size(), 3u);
  for (auto n : cell.nonces) EXPECT_GE(n, 100u);
  EXPECT_EQ(cell.as_set().size(), 3u);
}

TEST(GenerateCell, RepeatedSloganLeadsToShortfall) {
  auto backend = sequence({transcript("ok_dkny.txt")});
  auto gw = gateway_for(backend);
  auto cell = generate_cell(kDkny, kAnticipation, 2, gw, RemixConfig{});
  EXPECT_EQ(cell.slogans.size(), 1u);
  EXPECT_EQ(cell.attempts, 6u);
  ASSERT_TRUE(cell.shortfall);
  EXPECT_EQ(*cell.shortfall, "accepted 1 of 2 slogans after 6 attempts");
  EXPECT_EQ(cell.discards.size(), 5u);
  for (const auto& d : cell.discards) EXPECT_EQ(d.reason, "duplicate");
  EXPECT_EQ(backend->calls(), 6);
}

TEST(GenerateCell, AttemptBudgetIsRespectedAcrossRetries) {
  auto backend = sequence({transcript("bad_empty_slogan.txt")});
  auto gw = gateway_for(backend);
  RemixConfig cfg;
  cfg.retry_cap = 3;
  auto cell = generate_cell(kDkny, kAnticipation, 2, gw, cfg, 0, 4);
  EXPECT_EQ(cell.attempts, 4u);
  EXPECT_EQ(backend->calls(), 4);
  EXPECT_TRUE(cell.slogans.empty());
  EXPECT_EQ(cell.discards.size(), 4u);
}

TEST(Baseline, CleansOutput) {
  EXPECT_EQ(clean_baseline_output("\n  \"Dove: real beauty.\"  \nextra"), "Dove: real beauty.");
  EXPECT_EQ(clean_baseline_output("Slogan: “Just do it.”"), "Just do it.");
  EXPECT_EQ(clean_baseline_output("**Think different.**"), "Think different.");
  EXPECT_EQ(clean_baseline_output("  \n \n"), "");
}

TEST(Baseline, PromptIsTheDocumentedTemplate) {
  EXPECT_EQ(build_baseline_prompt(kDkny, kAnticipation),
            "Write one advertising slogan for DKNY targeting the emotion Anticipation. Output only the slogan.");
}

TEST(Baseline, CellWithMockAndDiscards) {
  auto mock = mock_script(load_mock_script(qmtest::fixture("mock/mock.json")));
  auto gw = gateway_for(mock);
  BaselineConfig cfg;
  cfg.name = "plain";
  auto cell = generate_baseline_cell(kDkny, kAnticipation, 3, gw, cfg, 5);
  ASSERT_EQ(cell.slogans.size(), 3u);
  for (const auto& s : cell.slogans) {
    EXPECT_EQ(s.source_method(), SourceMethod::baseline("plain"));
    EXPECT_FALSE(s.trace().has_value());
  }

  auto empty = sequence({"", "A", "A", "B"});
  auto gw2 = gateway_for(empty);
  auto cell2 = generate_baseline_cell(kDkny, kAnticipation, 2, gw2, BaselineConfig{});
  ASSERT_EQ(cell2.slogans.size(), 2u);
  EXPECT_EQ(cell2.attempts, 4u);
  ASSERT_EQ(cell2.discards.size(), 2u);
  EXPECT_EQ(cell2.discards[0].reason, "empty-output");
  EXPECT_EQ(cell2.discards[1].reason, "duplicate");
}
