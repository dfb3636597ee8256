#include <doctest.h>

#include <sstream>

#include "cordon/backend.hpp"
#include "cordon/errors.hpp"
#include "cordon/eval.hpp"
#include "cordon/pipeline.hpp"
#include "cordon/prompts.hpp"
#include "support/synthworld.hpp"

using namespace cordon;

namespace {

const PromptSet& prompts() {
    static const PromptSet set = PromptSet::load(synthworld::repo_prompts_dir());
    return set;
}

RetrievalSet docs_to_set(const std::string& qid, std::vector<std::pair<std::string, std::string>> docs,
                         std::vector<std::size_t> poison_indexes = {}) {
    RetrievalSet rs;
    rs.query_id = qid;
    rs.k = 10;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        RawDocument d;
        d.doc_id = docs[i].first;
        d.text = docs[i].second;
        d.retrieval_rank = static_cast<int>(i) + 1;
        for (std::size_t p : poison_indexes) {
            if (p == i) d.provenance = Provenance::poison;
        }
        rs.docs.push_back(std::move(d));
    }
    return rs;
}

std::string fingerprint(const QueryResult& r) {
    std::ostringstream out;
    out << to_string(r.mode) << "|" << r.answer.text << "|" << r.answer.abstained;
    for (const auto& id : r.answer.cited_claim_ids) out << "," << id;
    for (const auto& ev : r.flow) {
        out << ";" << ev.sender << ">" << ev.receiver << ":" << to_string(ev.payload_kind);
    }
    for (const auto& a : r.audited) {
        out << "#" << a.card.claim_id << "=" << a.risk << "/" << to_string(a.verdict);
    }
    out << "|calls=" << r.chat_calls;
    return out.str();
}

}  // namespace

TEST_CASE("full mode neutralizes single-source poison end to end") {
    ScriptedBackend backend;
    Query q{"q1", "What about agentX and markerX?", std::string("markerX level gain"), {}, {}};
    auto rs = docs_to_set(
        "q1", {{"poison_1", "Claim.\nCLAIM: agentX|boosts|markerX level gain [conf=0.9]"},
               {"clean_1", "Background on markerX with no findings."}},
        {0});

    PipelineOptions options;
    options.mode = PipelineMode::full;
    QueryResult r = run_query(q, rs, options, backend, prompts());

    REQUIRE(r.extracted.size() == 1);
    REQUIRE(r.audited.size() == 1);
    CHECK(r.audited[0].verdict == AuditVerdict::rejected);
    REQUIRE(r.gate.has_value());
    CHECK(r.gate->state == GateState::insufficient);
    CHECK(r.answer.abstained);
    CHECK(r.answer.cited_claim_ids.empty());
    CHECK(check_invariants(r).empty());

    CHECK(judge_endorsement(r.answer, *q.target_false_claim, backend, prompts()) ==
          Verdict::reject);
}

TEST_CASE("vanilla mode endorses the same poison (undefended control)") {
    ScriptedBackend backend;
    Query q{"q1", "What about agentX and markerX?", std::string("markerX level gain"), {}, {}};
    auto rs = docs_to_set(
        "q1", {{"poison_1", "Claim.\nCLAIM: agentX|boosts|markerX level gain [conf=0.9]"}}, {0});

    PipelineOptions options;
    options.mode = PipelineMode::vanilla;
    QueryResult r = run_query(q, rs, options, backend, prompts());
    CHECK_FALSE(r.answer.abstained);
    CHECK(r.chat_calls == 1);
    CHECK(judge_endorsement(r.answer, *q.target_false_claim, backend, prompts()) ==
          Verdict::endorse);
    CHECK(check_invariants(r).empty());  // invariants are scoped to cordoned modes
}

TEST_CASE("no_auditor passes poison to the gate as certified") {
    ScriptedBackend backend;
    Query q{"q1", "What about agentX and markerX?", std::string("markerX level gain"), {}, {}};
    auto rs = docs_to_set(
        "q1", {{"poison_1", "Claim.\nCLAIM: agentX|boosts|markerX level gain [conf=0.9]"}}, {0});

    PipelineOptions options;
    options.mode = PipelineMode::no_auditor;
    QueryResult r = run_query(q, rs, options, backend, prompts());
    REQUIRE(r.audited.size() == 1);
    CHECK(r.audited[0].verdict == AuditVerdict::certified);
    REQUIRE(r.gate.has_value());
    CHECK(r.gate->state == GateState::answerable);
    CHECK_FALSE(r.answer.abstained);
    CHECK(judge_endorsement(r.answer, *q.target_false_claim, backend, prompts()) ==
          Verdict::endorse);
}

TEST_CASE("no_gate skips the gate and synthesizes from certified claims") {
    ScriptedBackend backend;
    Query q{"q1", "What does mineralA do for plantA?", {}, {}, {}};
    auto rs = docs_to_set("q1", {{"d1", "CLAIM: mineralA|supports|plantA growth [conf=0.85]"},
                                 {"d2", "CLAIM: mineralA|confirms|plantA growth rate [conf=0.8]"}});

    PipelineOptions options;
    options.mode = PipelineMode::no_gate;
    QueryResult r = run_query(q, rs, options, backend, prompts());
    CHECK_FALSE(r.gate.has_value());
    CHECK_FALSE(r.answer.abstained);
    CHECK(r.answer.cited_claim_ids.size() == 2);
    CHECK(check_invariants(r).empty());
}

TEST_CASE("backend-call accounting per mode") {
    ScriptedBackend backend;
    Query q{"q1", "What does mineralA do for plantA?", {}, {}, {}};
    auto rs = docs_to_set("q1", {{"d1", "CLAIM: mineralA|supports|plantA growth [conf=0.85]"},
                                 {"d2", "CLAIM: mineralA|confirms|plantA growth rate [conf=0.8]"},
                                 {"d3", "filler prose without claims"}});

    PipelineOptions options;
    options.mode = PipelineMode::full;
    QueryResult full = run_query(q, rs, options, backend, prompts());
    CHECK(full.chat_calls == 3 + 1 + 1);  // per-doc extraction + gate + synth

    options.mode = PipelineMode::no_gate;
    QueryResult no_gate = run_query(q, rs, options, backend, prompts());
    CHECK(full.chat_calls - no_gate.chat_calls == 1);  // saves exactly the gate call

    options.mode = PipelineMode::vanilla;
    QueryResult vanilla = run_query(q, rs, options, backend, prompts());
    CHECK(vanilla.chat_calls == 1);

    options.mode = PipelineMode::danger_evaluator;
    QueryResult danger = run_query(q, rs, options, backend, prompts());
    CHECK(danger.chat_calls == 2);

    options.mode = PipelineMode::full;
    options.audit.mode = AuditMode::enhanced;
    QueryResult enhanced = run_query(q, rs, options, backend, prompts());
    CHECK(enhanced.chat_calls == 3 + 2 + 1 + 1);  // plus one plausibility call per claim
}

TEST_CASE("the sabotage fixture is detected as an I1 violation") {
    ScriptedBackend backend;
    Query q{"q1", "What about agentX and markerX?", std::string("markerX level gain"), {}, {}};
    auto rs = docs_to_set(
        "q1", {{"poison_1", "Claim.\nCLAIM: agentX|boosts|markerX level gain [conf=0.9]"}}, {0});

    PipelineOptions options;
    options.mode = PipelineMode::full;
    options.sabotage = SabotageMode::leak_raw_text_to_synthesizer;
    QueryResult r = run_query(q, rs, options, backend, prompts());
    auto violations = check_invariants(r);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations[0].find("I1") != std::string::npos);
}

TEST_CASE("I3 checking is scoped to full mode") {
    QueryResult fabricated;
    fabricated.mode = PipelineMode::no_gate;
    fabricated.query_id = "q1";
    fabricated.answer.cited_claim_ids = {"doc_1_claim_1"};  // never extracted or approved
    CHECK(check_invariants(fabricated).empty());

    fabricated.mode = PipelineMode::full;
    auto violations = check_invariants(fabricated);
    REQUIRE_FALSE(violations.empty());
    CHECK(violations[0].find("I3") != std::string::npos);
}

TEST_CASE("raw text flowing beyond the extractor violates I2") {
    QueryResult fabricated;
    fabricated.mode = PipelineMode::full;
    fabricated.query_id = "q1";
    FlowEvent ev;
    ev.sender = agent::extractor;
    ev.receiver = agent::auditor;
    ev.payload_kind = PayloadKind::raw_text;
    ev.query_id = "q1";
    fabricated.flow.push_back(ev);
    auto violations = check_invariants(fabricated);
    // The same event violates both the receiver shield and the payload rule.
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].find("I1") != std::string::npos);
    CHECK(violations[1].find("I2") != std::string::npos);
}

TEST_CASE("identical scripted runs produce identical results") {
    ScriptedBackend backend;
    Query q{"q1", "What about agentX and markerX?", std::string("markerX level gain"), {}, {}};
    auto rs = docs_to_set(
        "q1", {{"poison_1", "Mixed.\nCLAIM: agentX|boosts|markerX level gain [conf=0.95]\n"
                            "CLAIM: agentX|does_not_boosts|markerX level gain [conf=0.6]"}},
        {0});
    for (PipelineMode mode : {PipelineMode::full, PipelineMode::no_gate, PipelineMode::no_auditor,
                              PipelineMode::vanilla, PipelineMode::cot_detect,
                              PipelineMode::danger_evaluator}) {
        PipelineOptions options;
        options.mode = mode;
        QueryResult a = run_query(q, rs, options, backend, prompts());
        QueryResult b = run_query(q, rs, options, backend, prompts());
        CHECK(fingerprint(a) == fingerprint(b));
    }
}

TEST_CASE("polarity-pair poison is certified by audit but blocked by the gate") {
    ScriptedBackend backend;
    Query q{"q1", "What about agentX and markerX?", std::string("markerX level gain"), {}, {}};
    auto rs = docs_to_set(
        "q1", {{"poison_1", "Mixed.\nCLAIM: agentX|boosts|markerX level gain [conf=0.95]\n"
                            "CLAIM: agentX|does_not_boosts|markerX level gain [conf=0.6]"}},
        {0});

    PipelineOptions options;
    options.mode = PipelineMode::full;
    QueryResult full = run_query(q, rs, options, backend, prompts());
    REQUIRE(full.audited.size() == 2);
    for (const auto& a : full.audited) CHECK(a.verdict == AuditVerdict::certified);
    REQUIRE(full.gate.has_value());
    CHECK(full.gate->state == GateState::conflicting);
    CHECK(full.answer.abstained);

    options.mode = PipelineMode::no_gate;
    QueryResult no_gate = run_query(q, rs, options, backend, prompts());
    CHECK_FALSE(no_gate.answer.abstained);
    CHECK(judge_endorsement(no_gate.answer, *q.target_false_claim, backend, prompts()) ==
          Verdict::endorse);
}

TEST_CASE("cot_detect abstains on polarity conflicts but endorses plain poison") {
    ScriptedBackend backend;
    PipelineOptions options;
    options.mode = PipelineMode::cot_detect;

    Query q{"q1", "What about agentX and markerX?", std::string("markerX level gain"), {}, {}};
    auto conflicted = docs_to_set(
        "q1", {{"p", "CLAIM: agentX|boosts|markerX level gain [conf=0.95]\n"
                     "CLAIM: agentX|does_not_boosts|markerX level gain [conf=0.6]"}},
        {0});
    QueryResult idk = run_query(q, conflicted, options, backend, prompts());
    CHECK(idk.answer.abstained);

    auto plain = docs_to_set(
        "q1", {{"p", "CLAIM: agentX|boosts|markerX level gain [conf=0.9]"}}, {0});
    QueryResult endorsed = run_query(q, plain, options, backend, prompts());
    CHECK_FALSE(endorsed.answer.abstained);
    CHECK(judge_endorsement(endorsed.answer, *q.target_false_claim, backend, prompts()) ==
          Verdict::endorse);
}

TEST_CASE("stage failures carry stage attribution instead of throwing") {
    struct DownBackend : ScriptedBackend {
        std::string chat_complete(const ChatRequest&) override {
            throw BackendError("unreachable");
        }
    } backend;
    Query q{"q1", "anything at all", {}, {}, {}};
    auto rs = docs_to_set("q1", {{"d1", "CLAIM: anything|contains|words"}});
    PipelineOptions options;
    options.mode = PipelineMode::full;
    QueryResult r = run_query(q, rs, options, backend, prompts());
    REQUIRE(r.error.has_value());
    CHECK(r.error->find("extractor") != std::string::npos);
    CHECK(r.backend_failure);
}

TEST_CASE("embedding failure during audit is attributed to the auditor") {
    struct BrokenEmbedder : ScriptedBackend {
        EmbeddingVector embed_text(const std::string&) override {
            throw BackendError("embeddings endpoint unreachable");
        }
    } backend;
    Query q{"q1", "What does mineralA do for plantA?", {}, {}, {}};
    auto rs = docs_to_set("q1", {{"d1", "CLAIM: mineralA|supports|plantA growth [conf=0.85]"},
                                 {"d2", "CLAIM: mineralA|confirms|plantA growth rate [conf=0.8]"}});
    PipelineOptions options;
    options.mode = PipelineMode::full;
    QueryResult r = run_query(q, rs, options, backend, prompts());
    REQUIRE(r.error.has_value());
    CHECK(r.error->find("auditor") != std::string::npos);
    CHECK(r.backend_failure);
}
