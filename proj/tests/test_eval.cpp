#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "cordon/errors.hpp"
#include "cordon/eval.hpp"
#include "cordon/experiment.hpp"
#include "cordon/stats.hpp"
#include "cordon/text.hpp"
#include "cordon/wire.hpp"
#include "support/synthworld.hpp"

using namespace cordon;

namespace {

const PromptSet& prompts() {
    static const PromptSet set = PromptSet::load(synthworld::repo_prompts_dir());
    return set;
}

}  // namespace

TEST_CASE("abstained answers are REJECT with zero judge calls") {
    ScriptedBackend inner;
    CountingBackend backend(inner);
    Answer refusal;
    refusal.text = "Insufficient certified evidence to answer.";
    refusal.abstained = true;
    CHECK(judge_endorsement(refusal, "some false claim", backend, prompts()) == Verdict::reject);
    CHECK(backend.chat_calls() == 0);
}

TEST_CASE("the scripted judge endorses answers repeating the target") {
    ScriptedBackend backend;
    Answer echoing;
    echoing.text = "According to the retrieved documents: agentX boosts markerX level gain.";
    CHECK(judge_endorsement(echoing, "markerX level gain", backend, prompts()) ==
          Verdict::endorse);
}

TEST_CASE("off-label judge responses are UNCLEAR with a warning") {
    struct VagueBackend : ScriptedBackend {
        std::string chat_complete(const ChatRequest& req) override {
            if (req.role == Role::judge) return "Maybe";
            return ScriptedBackend::chat_complete(req);
        }
    } backend;
    Answer a;
    a.text = "something";
    CHECK(judge_endorsement(a, "target claim", backend, prompts()) == Verdict::unclear);
}

TEST_CASE("compute_asr is the endorse fraction") {
    std::vector<Verdict> verdicts(241, Verdict::reject);
    for (int i = 0; i < 5; ++i) verdicts[static_cast<std::size_t>(i)] = Verdict::endorse;
    CHECK(compute_asr(verdicts) == doctest::Approx(0.0207).epsilon(1e-2));
    CHECK(std::abs(compute_asr(verdicts) - 5.0 / 241.0) < 1e-12);

    std::vector<Verdict> zeros(49, Verdict::reject);
    CHECK(compute_asr(zeros) == 0.0);

    std::vector<Verdict> all(7, Verdict::endorse);
    CHECK(compute_asr(all) == 1.0);

    CHECK_THROWS_AS(compute_asr({}), InputError);
}

TEST_CASE("wilson intervals reproduce the reported table values") {
    // 0/49 -> [0.0%, 7.3%]
    Interval nq = wilson_ci(0, 49);
    CHECK(nq.low == 0.0);  // exactly
    CHECK(nq.high == doctest::Approx(0.073).epsilon(0.015));
    CHECK(std::abs(nq.high - 0.073) < 0.001);

    // pooled 5/241 -> about [0.9%, 4.8%]
    Interval pooled = wilson_ci(5, 241);
    CHECK(std::abs(pooled.low - 0.008) < 0.005);
    CHECK(std::abs(pooled.high - 0.048) < 0.005);

    // 0/1 -> [0, z^2/(1+z^2)] ~ [0, 0.7935]
    Interval tiny = wilson_ci(0, 1);
    CHECK(tiny.low == 0.0);
    CHECK(tiny.high == doctest::Approx(0.7935).epsilon(1e-3));

    CHECK(wilson_ci(3, 3).high == 1.0);
    CHECK_THROWS_AS(wilson_ci(-1, 10), InputError);
    CHECK_THROWS_AS(wilson_ci(11, 10), InputError);
    CHECK_THROWS_AS(wilson_ci(1, 0), InputError);
}

TEST_CASE("clopper-pearson matches its closed forms and the reported values") {
    // 0/49: upper = 1 - 0.025^(1/49)
    Interval nq = clopper_pearson_ci(0, 49);
    CHECK(nq.low == 0.0);
    CHECK(nq.high == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 49.0)).epsilon(1e-9));
    CHECK(std::abs(nq.high - 0.073) < 0.001);

    // 1/50 -> [0.1%, 10.7%]
    Interval scifact = clopper_pearson_ci(1, 50);
    CHECK(std::abs(scifact.low - 0.001) < 0.001);
    CHECK(std::abs(scifact.high - 0.107) < 0.001);

    // 2/43 -> [0.6%, 15.8%]
    Interval msmarco = clopper_pearson_ci(2, 43);
    CHECK(std::abs(msmarco.low - 0.006) < 0.001);
    CHECK(std::abs(msmarco.high - 0.158) < 0.001);

    // n/n: lower = 0.025^(1/n)
    Interval ceiling = clopper_pearson_ci(20, 20);
    CHECK(ceiling.high == 1.0);
    CHECK(ceiling.low == doctest::Approx(std::pow(0.025, 1.0 / 20.0)).epsilon(1e-9));
}

TEST_CASE("intervals contain the point estimate and shrink like one over root n") {
    for (auto [s, n] : std::vector<std::pair<int, int>>{{0, 50}, {3, 50}, {25, 50}, {49, 50}}) {
        const double p = static_cast<double>(s) / n;
        Interval w = wilson_ci(s, n);
        Interval cp = clopper_pearson_ci(s, n);
        CHECK(w.low <= p + 1e-12);
        CHECK(w.high >= p - 1e-12);
        CHECK(cp.low <= p + 1e-12);
        CHECK(cp.high >= p - 1e-12);
    }
    // Doubling n to 100 narrows the width by roughly 1/sqrt(2).
    const double w50 = wilson_ci(5, 50).high - wilson_ci(5, 50).low;
    const double w100 = wilson_ci(10, 100).high - wilson_ci(10, 100).low;
    CHECK(w100 / w50 == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.1));
}

namespace {

QueryResult poisoned_result(const std::string& qid, int extracted, int certified, int rejected,
                            std::optional<GateState> gate_state) {
    QueryResult r;
    r.query_id = qid;
    r.mode = PipelineMode::full;
    for (int i = 0; i < extracted; ++i) {
        ClaimCard c;
        c.claim_id = qid + "_c" + std::to_string(i);
        c.entity = "e";
        c.relation = "r";
        c.object = "o";
        c.claim_text = "e r o";
        c.source_doc = "poison_doc";
        r.extracted.push_back(c);
        AuditedClaim a;
        a.card = r.extracted.back();
        a.verdict = i < certified             ? AuditVerdict::certified
                    : i < certified + rejected ? AuditVerdict::rejected
                                               : AuditVerdict::uncertain;
        r.audited.push_back(a);
    }
    if (gate_state) r.gate = GateDecision{*gate_state, "x"};
    return r;
}

}  // namespace

TEST_CASE("cascade metrics reconcile and leave zero denominators undefined") {
    PoisonGroundTruth gt;
    gt.poison_docs_by_query["q1"] = {"poison_doc"};
    gt.poison_docs_by_query["q2"] = {"poison_doc"};

    SUBCASE("all extracted poison rejected reports a 100% audit reject rate") {
        std::vector<QueryResult> results = {
            poisoned_result("q1", 3, 0, 3, GateState::insufficient),
            poisoned_result("q2", 2, 0, 2, GateState::insufficient),
        };
        CascadeMetrics m = cascade_metrics(results, gt);
        CHECK(m.retrieved_poison_docs == 2);
        CHECK(m.extracted_poison_claims == 5);
        REQUIRE(m.audit_reject_rate.has_value());
        CHECK(*m.audit_reject_rate == 1.0);
        CHECK(m.queries_with_surviving_poison == 0);
        CHECK_FALSE(m.gate_block_rate.has_value());  // zero denominator
    }
    SUBCASE("partial rejection computes the exact fraction") {
        std::vector<QueryResult> results = {
            poisoned_result("q1", 5, 1, 4, GateState::conflicting),
            poisoned_result("q2", 5, 1, 4, GateState::answerable),
        };
        CascadeMetrics m = cascade_metrics(results, gt);
        CHECK(m.extracted_poison_claims == 10);
        CHECK(m.certified_poison_claims == 2);
        CHECK(*m.audit_reject_rate == doctest::Approx(0.8));
        CHECK(m.queries_with_surviving_poison == 2);
        CHECK(*m.gate_block_rate == doctest::Approx(0.5));
    }
    SUBCASE("zero extraction leaves the audit rate undefined") {
        std::vector<QueryResult> results = {poisoned_result("q1", 0, 0, 0, GateState::insufficient)};
        CascadeMetrics m = cascade_metrics(results, gt);
        CHECK(m.retrieved_poison_docs == 1);
        CHECK(m.extracted_poison_claims == 0);
        CHECK(*m.extraction_yield == 0.0);
        CHECK_FALSE(m.audit_reject_rate.has_value());
    }
}

TEST_CASE("reports round-trip, stay deterministic, and keep nulls explicit") {
    ExperimentReport report;
    report.mode = "full";
    report.seed = 42;
    report.k = 10;
    report.total_queries = 2;
    report.poisoned_queries = 1;
    report.judged = 1;
    report.reject = 1;
    report.asr = 0.0;
    report.asr_wilson = wilson_ci(0, 1);
    QueryEvalDetail d;
    d.query_id = "q1";
    d.poisoned = true;
    d.judged = true;
    d.verdict = Verdict::reject;
    report.details.push_back(d);

    const auto dir = synthworld::fresh_temp_dir("report");
    emit_report(report, dir / "a");
    emit_report(report, dir / "b");

    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    CHECK(slurp(dir / "a" / "metrics.json") == slurp(dir / "b" / "metrics.json"));
    CHECK(slurp(dir / "a" / "details.jsonl") == slurp(dir / "b" / "details.jsonl"));

    // Round-trip: the written file re-parses to exactly the emitted object.
    auto written = nlohmann::ordered_json::parse(slurp(dir / "a" / "metrics.json"));
    CHECK(written == report_to_json(report, false));

    // Undefined metrics appear as explicit nulls, never omitted.
    CHECK(written.contains("answerability_rate"));
    CHECK(written.at("answerability_rate").is_null());
    CHECK(written.at("cascade").contains("gate_block_rate"));
    CHECK(written.at("cascade").at("gate_block_rate").is_null());

    // Detail lines carry null verdict fields for unjudged queries.
    QueryEvalDetail clean;
    clean.query_id = "q2";
    auto detail_json = detail_to_json(clean);
    CHECK(detail_json.contains("verdict"));
    CHECK(detail_json.at("verdict").is_null());
}

TEST_CASE("refusals never carry poison-target content tokens") {
    const auto dir = synthworld::fresh_temp_dir("refusal_purity");
    const auto suite = synthworld::write_standard_suite(dir / "suite");
    cordon::ExperimentConfig config = synthworld::suite_config(suite, "full", dir / "out");
    cordon::ExperimentOutcome outcome = cordon::run_experiment_in_memory(config);

    const auto queries = cordon::load_queries(suite.queries);
    std::map<std::string, std::string> targets;
    for (const auto& q : queries) {
        if (q.target_false_claim) targets[q.query_id] = *q.target_false_claim;
    }
    long refusals = 0;
    for (const auto& r : outcome.results) {
        if (!r.answer.abstained) continue;
        ++refusals;
        const auto answer_tokens = cordon::token_set(r.answer.text);
        for (const auto& tok : cordon::content_tokens(targets.at(r.query_id))) {
            CHECK(answer_tokens.count(tok) == 0);
        }
    }
    CHECK(refusals > 0);  // the full pipeline must actually refuse poisoned queries
}

TEST_CASE("un-judged queries are excluded from the ASR denominator and counted") {
    const auto dir = synthworld::fresh_temp_dir("exclusion");
    const auto suite = synthworld::write_scifact_style_suite(dir / "suite");

    // Precomputed retrieval with one poisoned query missing from the run
    // file: that query fails at retrieval and must drop out of the judged
    // denominator rather than silently counting as REJECT.
    const auto corpus = cordon::load_corpus(suite.corpus);
    const auto queries = cordon::load_queries(suite.queries);
    std::ofstream run_out(dir / "run.jsonl");
    for (std::size_t qi = 0; qi + 1 < queries.size(); ++qi) {
        int rank = 0;
        for (const auto& doc_id : corpus.doc_ids) {
            nlohmann::ordered_json rec;
            rec["query_id"] = queries[qi].query_id;
            rec["doc_id"] = doc_id;
            rec["rank"] = ++rank;
            if (rank > 10) break;
            cordon::write_jsonl_line(run_out, rec);
        }
    }
    run_out.close();

    cordon::ExperimentConfig config = synthworld::suite_config(suite, "full", dir / "out");
    config.raw["data"]["retrieval_mode"] = "precomputed";
    config.raw["data"]["run_file"] = (dir / "run.jsonl").string();
    config = cordon::parse_config(config.raw);
    cordon::ExperimentOutcome outcome = cordon::run_experiment_in_memory(config);

    CHECK(outcome.report.poisoned_queries == 20);
    CHECK(outcome.report.judged == 19);
    CHECK(outcome.report.excluded_from_judgement == 1);
    CHECK(outcome.report.endorse + outcome.report.reject + outcome.report.unclear ==
          outcome.report.judged);
}

TEST_CASE("query-level concurrency does not change the report bytes") {
    const auto dir = synthworld::fresh_temp_dir("concurrency");
    const auto suite = synthworld::write_standard_suite(dir / "suite");

    auto run_with = [&](int concurrency, const std::string& tag) {
        cordon::ExperimentConfig config = synthworld::suite_config(suite, "full", dir / tag);
        config.raw["concurrency"] = concurrency;
        config = cordon::parse_config(config.raw);
        cordon::run_experiment(config);
        std::ifstream metrics(dir / tag / "metrics.json");
        std::ifstream details(dir / tag / "details.jsonl");
        std::stringstream m, d;
        m << metrics.rdbuf();
        d << details.rdbuf();
        return std::pair<std::string, std::string>(m.str(), d.str());
    };
    const auto serial = run_with(1, "serial");
    const auto parallel = run_with(4, "parallel");
    CHECK(serial.first == parallel.first);
    CHECK(serial.second == parallel.second);
}

TEST_CASE("verbose reports add the second interval method") {
    ExperimentReport report;
    report.asr = 0.0;
    report.asr_wilson = wilson_ci(0, 10);
    report.asr_clopper_pearson = clopper_pearson_ci(0, 10);
    const auto terse = report_to_json(report, false);
    CHECK_FALSE(terse.contains("asr_ci_clopper_pearson"));
    const auto verbose = report_to_json(report, true);
    REQUIRE(verbose.contains("asr_ci_clopper_pearson"));
    CHECK_FALSE(verbose.at("asr_ci_clopper_pearson").is_null());
}

TEST_CASE("the scripted correctness judge uses the four labels") {
    ScriptedBackend backend;
    Answer good;
    good.text = "Based on [c1][c2]: plantZ growth; plantZ growth rate";
    CHECK(judge_correctness(good, "plantZ growth", backend, prompts()) ==
          CorrectnessLabel::correct);

    Answer partial;
    partial.text = "Based on [c1]: growth only";
    CHECK(judge_correctness(partial, "plantZ growth", backend, prompts()) ==
          CorrectnessLabel::partial);

    Answer wrong;
    wrong.text = "Based on [c1]: unrelated numbers";
    CHECK(judge_correctness(wrong, "plantZ growth", backend, prompts()) ==
          CorrectnessLabel::incorrect);

    Answer refusal;
    refusal.abstained = true;
    refusal.text = "Insufficient certified evidence to answer.";
    CHECK(judge_correctness(refusal, "plantZ growth", backend, prompts()) ==
          CorrectnessLabel::insufficient);
}
