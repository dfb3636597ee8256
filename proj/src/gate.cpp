#include "cordon/gate.hpp"

#include <algorithm>

#include <json.hpp>

#include "cordon/errors.hpp"
#include "cordon/wire.hpp"

namespace cordon {

bool polarity_conflict_pair(const ClaimCard& a, const ClaimCard& b,
                            const EntityNormalizer& normalizer,
                            const RelationEquivalence& relations) {
    if (normalizer.normalize(a.entity) != normalizer.normalize(b.entity)) return false;
    if (is_negated_relation(a.relation) == is_negated_relation(b.relation)) return false;
    const std::string base_a = strip_negation(a.relation);
    const std::string base_b = strip_negation(b.relation);
    if (base_a != base_b && !relations.same_class(base_a, base_b)) return false;
    return jaccard(token_set(a.object), token_set(b.object)) > 0.5;
}

GateDecision gate_decide(const Query& query, const std::vector<AuditedClaim>& certified,
                         Backend& backend, const PromptSet& prompts,
                         const EntityNormalizer& normalizer,
                         const RelationEquivalence& relations) {
    if (certified.empty()) {
        return {GateState::insufficient, "no certified claims"};
    }

    bool single_source = true;
    double min_conf = 1.0;
    for (const auto& a : certified) {
        if (a.card.source_doc != certified.front().card.source_doc) single_source = false;
        min_conf = std::min(min_conf, a.card.confidence);
    }
    if (single_source && min_conf < 0.5) {
        return {GateState::insufficient, "single-source evidence with low confidence"};
    }

    for (std::size_t i = 0; i < certified.size(); ++i) {
        for (std::size_t j = i + 1; j < certified.size(); ++j) {
            if (polarity_conflict_pair(certified[i].card, certified[j].card, normalizer,
                                       relations)) {
                return {GateState::conflicting,
                        "certified claims " + certified[i].card.claim_id + " and " +
                            certified[j].card.claim_id + " assert opposite polarities"};
            }
        }
    }

    nlohmann::ordered_json cards = nlohmann::ordered_json::array();
    for (const auto& a : certified) {
        cards.push_back(claim_card_to_json(a.card));
    }
    ChatRequest req;
    req.role = Role::gate;
    req.temperature = default_temperature(Role::gate);
    req.user_content =
        PromptSet::fill(prompts.for_role(Role::gate),
                        {{"[query]", query.text}, {"[certified_claim_cards]", cards.dump()}});

    std::string response;
    try {
        response = backend.chat_complete(req);
    } catch (const Error& e) {
        // Fail closed: unavailability must not unlock synthesis.
        return {GateState::insufficient, std::string("gate backend failure: ") + e.what()};
    }

    const std::string folded = fold_case(response);
    const auto pos_of = [&](const char* label) { return folded.find(label); };
    const std::size_t pa = pos_of("answerable");
    const std::size_t pi = pos_of("insufficient");
    const std::size_t pc = pos_of("conflicting");

    GateState state;
    if (pa != std::string::npos && pa < pi && pa < pc) {
        state = GateState::answerable;
    } else if (pc != std::string::npos && pc < pi) {
        state = GateState::conflicting;
    } else if (pi != std::string::npos) {
        state = GateState::insufficient;
    } else {
        return {GateState::insufficient, "unparseable gate response (fail-closed): " + response};
    }
    std::string rationale = response.empty() ? to_string(state) : response;
    return {state, rationale};
}

}  // namespace cordon
