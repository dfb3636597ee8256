#include "cordon/synthesizer.hpp"

#include <iostream>
#include <regex>
#include <set>

#include <json.hpp>

#include "cordon/errors.hpp"
#include "cordon/wire.hpp"

namespace cordon {

namespace {

struct CitationScan {
    std::vector<std::string> cited_claim_ids;  // first-occurrence order, deduped
    bool valid = true;
};

CitationScan scan_citations(const std::string& text, const std::vector<AuditedClaim>& approved) {
    static const std::regex kRef(R"(\[c(\d+)\])");
    CitationScan scan;
    std::set<std::string> seen;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kRef);
         it != std::sregex_iterator(); ++it) {
        const std::size_t n = std::stoul((*it)[1].str());
        if (n < 1 || n > approved.size()) {
            scan.valid = false;
            return scan;
        }
        const std::string& id = approved[n - 1].card.claim_id;
        if (seen.insert(id).second) {
            scan.cited_claim_ids.push_back(id);
        }
    }
    return scan;
}

}  // namespace

Answer synthesize(const Query& query, const GateDecision& decision,
                  const std::vector<AuditedClaim>& approved, Backend& backend,
                  const PromptSet& prompts, std::optional<std::uint64_t> seed) {
    if (decision.state != GateState::answerable) {
        Answer refusal;
        refusal.text = kRefusalText;
        refusal.abstained = true;
        return refusal;
    }

    nlohmann::ordered_json cards = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < approved.size(); ++i) {
        auto card = claim_card_to_json(approved[i].card);
        card["ref"] = "c" + std::to_string(i + 1);
        cards.push_back(std::move(card));
    }
    ChatRequest req;
    req.role = Role::synthesizer;
    req.temperature = default_temperature(Role::synthesizer);
    req.seed = seed;
    req.user_content =
        PromptSet::fill(prompts.for_role(Role::synthesizer),
                        {{"[query]", query.text}, {"[certified_claim_cards]", cards.dump()}});

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string text;
        try {
            text = backend.chat_complete(req);
        } catch (const BackendError& e) {
            throw StageError("synthesizer", e.what(), true);
        } catch (const ProtocolError& e) {
            throw StageError("synthesizer", e.what(), true);
        } catch (const Error& e) {
            throw StageError("synthesizer", e.what());
        }
        CitationScan scan = scan_citations(text, approved);
        if (!scan.valid) {
            std::cerr << "[cordon] warning: answer cites a non-approved claim; "
                      << (attempt == 0 ? "regenerating once" : "giving up") << "\n";
            continue;
        }
        if (scan.cited_claim_ids.empty() && !approved.empty()) {
            std::cerr << "[cordon] warning: answerable query " << query.query_id
                      << " produced an answer with no citations\n";
        }
        Answer answer;
        answer.text = std::move(text);
        answer.cited_claim_ids = std::move(scan.cited_claim_ids);
        answer.abstained = false;
        return answer;
    }
    throw StageError("synthesizer", "citation violation persisted after regeneration");
}

}  // namespace cordon
