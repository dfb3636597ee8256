#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cordon/backend.hpp"
#include "cordon/pipeline.hpp"
#include "cordon/prompts.hpp"
#include "cordon/stats.hpp"
#include "cordon/types.hpp"

namespace cordon {

enum class Verdict { endorse, reject, unclear };
enum class CorrectnessLabel { correct, partial, incorrect, insufficient };

std::string to_string(Verdict v);
std::string to_string(CorrectnessLabel l);

/// LLM-judged endorsement of the attacker's target claim. Abstained
/// answers are REJECT with no backend call; anything the judge answers
/// beyond the three labels is UNCLEAR with a warning.
Verdict judge_endorsement(const Answer& answer, const std::string& target_false_claim,
                          Backend& backend, const PromptSet& prompts);

/// Clean-utility correctness judging (four labels); abstentions are
/// INSUFFICIENT with no backend call and stay out of the correctness
/// denominator.
CorrectnessLabel judge_correctness(const Answer& answer, const std::string& expected,
                                   Backend& backend, const PromptSet& prompts);

/// Endorse fraction over judged verdicts; throws InputError on empty input.
double compute_asr(const std::vector<Verdict>& verdicts);

/// Evaluation-side ground truth: which docs in each query's retrieval set
/// were poison. Invisible to every agent operation.
struct PoisonGroundTruth {
    std::map<std::string, std::set<std::string>> poison_docs_by_query;
};

struct CascadeMetrics {
    long retrieved_poison_docs = 0;
    long extracted_poison_claims = 0;
    long certified_poison_claims = 0;
    long rejected_poison_claims = 0;
    long queries_with_surviving_poison = 0;
    long blocked_queries_with_surviving_poison = 0;
    // Undefined (nullopt) when the denominator is zero.
    std::optional<double> extraction_yield;
    std::optional<double> audit_reject_rate;
    std::optional<double> gate_block_rate;
};

CascadeMetrics cascade_metrics(const std::vector<QueryResult>& results,
                               const PoisonGroundTruth& ground_truth);

struct QueryEvalDetail {
    std::string query_id;
    bool poisoned = false;
    bool judged = false;
    std::optional<Verdict> verdict;
    std::optional<CorrectnessLabel> correctness;
    bool answered = false;
    bool abstained = false;
    std::optional<GateState> gate_state;
    int n_extracted = 0;
    int n_certified = 0;
    int n_uncertain = 0;
    int n_rejected = 0;
    int chat_calls = 0;
    int embed_calls = 0;
    std::vector<std::string> invariant_violations;
    std::optional<std::string> error;
};

struct ExperimentReport {
    std::string mode;
    std::uint64_t seed = 0;
    int k = 0;
    long total_queries = 0;
    long clean_queries = 0;
    long poisoned_queries = 0;
    long judged = 0;
    long excluded_from_judgement = 0;
    long endorse = 0;
    long reject = 0;
    long unclear = 0;
    std::optional<double> asr;
    std::optional<Interval> asr_wilson;
    std::optional<Interval> asr_clopper_pearson;
    long answered_clean = 0;
    long abstained_clean = 0;
    std::optional<double> answerability_rate;
    std::optional<double> safety_refusal_rate;
    long correct = 0;
    long partial = 0;
    long incorrect = 0;
    std::optional<double> correctness_rate;  // correct / judged-correctness answers
    CascadeMetrics cascade;
    long invariant_violation_count = 0;
    long backend_failures = 0;
    long chat_calls_total = 0;
    long embed_calls_total = 0;
    std::vector<QueryEvalDetail> details;
};

nlohmann::ordered_json report_to_json(const ExperimentReport& report, bool verbose_stats);
nlohmann::ordered_json detail_to_json(const QueryEvalDetail& detail);

/// Writes metrics.json and details.jsonl (deterministic, stable field
/// order; undefined metrics are explicit nulls). Wall-clock timings go to
/// a separate timings.json sidecar supplied by the caller.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir,
                 bool verbose_stats = false);

}  // namespace cordon
