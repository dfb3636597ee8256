#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cordon/auditor.hpp"
#include "cordon/backend.hpp"
#include "cordon/extractor.hpp"
#include "cordon/prompts.hpp"
#include "cordon/retrieval.hpp"
#include "cordon/types.hpp"

namespace cordon {

enum class PipelineMode { full, no_gate, no_auditor, vanilla, cot_detect, danger_evaluator };

std::string to_string(PipelineMode mode);
PipelineMode pipeline_mode_from_string(const std::string& name);
bool is_cordoned(PipelineMode mode);

/// Test fixture: fabricates a raw_text flow event into the synthesizer so
/// the invariant checker's sensitivity can be exercised end to end.
enum class SabotageMode { none, leak_raw_text_to_synthesizer };

struct StageTimings {
    double extract_ms = 0.0;
    double audit_ms = 0.0;
    double gate_ms = 0.0;
    double synthesize_ms = 0.0;
    double total_ms = 0.0;
};

struct QueryResult {
    std::string query_id;
    PipelineMode mode = PipelineMode::full;
    Answer answer;
    std::optional<GateDecision> gate;
    std::vector<ClaimCard> extracted;
    std::vector<AuditedClaim> audited;
    std::vector<std::string> approved_claim_ids;  // what synthesis was allowed to cite
    bool uniform_agreement = false;
    std::vector<FlowEvent> flow;
    StageTimings timings;
    int chat_calls = 0;
    int embed_calls = 0;
    std::optional<std::string> error;  // stage-attributed failure, if any
    bool backend_failure = false;
};

struct PipelineOptions {
    PipelineMode mode = PipelineMode::full;
    AuditOptions audit;
    ExtractorOptions extractor;
    SabotageMode sabotage = SabotageMode::none;
    std::optional<std::uint64_t> seed;  // forwarded to seed-capable backends
};

/// Runs one query through the selected mode, recording every inter-agent
/// hand-off in the flow log. Stage failures are captured in
/// QueryResult::error rather than thrown, so a failed query still carries
/// its evidence trail.
QueryResult run_query(const Query& query, const RetrievalSet& retrieval,
                      const PipelineOptions& options, Backend& backend,
                      const PromptSet& prompts);

/// Machine-checks I1 (no raw text past the extractor), I2 (claim-only
/// communication after extraction), and, in full mode, I3 (every cited
/// claim was extracted, certified, and gate-approved). Returns human-
/// readable violations; empty for non-cordoned modes.
std::vector<std::string> check_invariants(const QueryResult& result);

}  // namespace cordon
