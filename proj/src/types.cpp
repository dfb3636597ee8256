#include "cordon/types.hpp"

namespace cordon {

std::string to_string(AuditVerdict v) {
    switch (v) {
        case AuditVerdict::certified: return "certified";
        case AuditVerdict::uncertain: return "uncertain";
        case AuditVerdict::rejected: return "rejected";
    }
    return "unknown";
}

std::string to_string(GateState s) {
    switch (s) {
        case GateState::answerable: return "ANSWERABLE";
        case GateState::insufficient: return "INSUFFICIENT";
        case GateState::conflicting: return "CONFLICTING";
    }
    return "UNKNOWN";
}

std::string to_string(PayloadKind k) {
    switch (k) {
        case PayloadKind::raw_text: return "raw_text";
        case PayloadKind::claim_cards: return "claim_cards";
        case PayloadKind::audited_claims: return "audited_claims";
        case PayloadKind::gate_decision: return "gate_decision";
        case PayloadKind::answer: return "answer";
    }
    return "unknown";
}

FlowEvent& FlowLog::append(std::string sender, std::string receiver, PayloadKind kind,
                           const std::string& query_id) {
    std::lock_guard<std::mutex> lock(mu_);
    auto& events = per_query_[query_id];
    FlowEvent ev;
    ev.sender = std::move(sender);
    ev.receiver = std::move(receiver);
    ev.payload_kind = kind;
    ev.query_id = query_id;
    ev.seq = events.size();
    events.push_back(std::move(ev));
    return events.back();
}

std::vector<FlowEvent> FlowLog::events_for(const std::string& query_id) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = per_query_.find(query_id);
    if (it == per_query_.end()) return {};
    return it->second;
}

std::size_t FlowLog::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t n = 0;
    for (const auto& [_, v] : per_query_) n += v.size();
    return n;
}

}  // namespace cordon
