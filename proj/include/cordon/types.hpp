#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cordon {

/// Subject/relation/object form of a factual assertion. Used both for
/// attacker targets and for claim comparison.
struct TargetTriple {
    std::string entity;
    std::string relation;
    std::string object;

    bool operator==(const TargetTriple&) const = default;
};

/// One evaluation unit. target_false_claim is present only on poisoned
/// evaluation queries; agents never see it.
struct Query {
    std::string query_id;
    std::string text;
    std::optional<std::string> target_false_claim;
    // Optional experiment-file extras (attack generation, correctness judging).
    std::optional<TargetTriple> target_triple;
    std::optional<std::string> expected_answer;
};

enum class Provenance { clean, poison };

/// Untrusted retrieved text. The provenance label is ground truth for
/// evaluation only; agent-facing code receives DocView projections that
/// carry no label.
struct RawDocument {
    std::string doc_id;
    std::string text;
    Provenance provenance = Provenance::clean;
    int retrieval_rank = 0;  // 1-based within a retrieval set
};

/// The projection of a RawDocument that agents are allowed to see.
struct DocView {
    std::string doc_id;
    std::string text;
    int retrieval_rank = 0;
};

inline DocView to_view(const RawDocument& d) {
    return DocView{d.doc_id, d.text, d.retrieval_rank};
}

/// Structured evidence unit: the only currency of inter-agent
/// communication after extraction.
struct ClaimCard {
    std::string claim_id;  // doc_N_claim_M
    std::string entity;
    std::string relation;
    std::string object;
    std::string claim_text;  // verbatim assertion, or "entity relation object"
    std::string source_doc;
    int retrieval_rank = 0;
    double confidence = 0.5;

    bool operator==(const ClaimCard&) const = default;
};

enum class AuditVerdict { certified, uncertain, rejected };

std::string to_string(AuditVerdict v);

/// Claim plus audit scores. risk == influence * (1 - support) unless the
/// plausibility clamp fired, in which case risk >= 0.7 and
/// plausibility_clamped is set.
struct AuditedClaim {
    ClaimCard card;
    double support = 0.0;
    double influence = 0.0;
    double risk = 0.0;
    std::optional<double> plausibility;
    AuditVerdict verdict = AuditVerdict::rejected;
    bool plausibility_clamped = false;
};

enum class GateState { answerable, insufficient, conflicting };

std::string to_string(GateState s);

struct GateDecision {
    GateState state = GateState::insufficient;
    std::string rationale;
};

struct Answer {
    std::string text;
    std::vector<std::string> cited_claim_ids;
    bool abstained = false;
};

enum class PayloadKind { raw_text, claim_cards, audited_claims, gate_decision, answer };

std::string to_string(PayloadKind k);

namespace agent {
inline constexpr const char* retrieval = "retrieval";
inline constexpr const char* extractor = "extractor";
inline constexpr const char* auditor = "auditor";
inline constexpr const char* gate = "gate";
inline constexpr const char* synthesizer = "synthesizer";
inline constexpr const char* user = "user";
}  // namespace agent

/// One inter-agent message record. The flow log is the evidence trail on
/// which the isolation invariants are machine-checked.
struct FlowEvent {
    std::string sender;
    std::string receiver;
    PayloadKind payload_kind = PayloadKind::raw_text;
    std::string query_id;
    std::uint64_t seq = 0;  // per-query ordering
};

/// Append-only event log. Appends may come from concurrent queries; order
/// is total per query_id.
class FlowLog {
public:
    FlowEvent& append(std::string sender, std::string receiver, PayloadKind kind,
                      const std::string& query_id);

    std::vector<FlowEvent> events_for(const std::string& query_id) const;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::vector<FlowEvent>> per_query_;
};

}  // namespace cordon
