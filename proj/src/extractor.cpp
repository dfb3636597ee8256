#include "cordon/extractor.hpp"

#include <algorithm>
#include <iostream>

#include <json.hpp>

#include "cordon/errors.hpp"
#include "cordon/wire.hpp"

namespace cordon {

std::vector<ClaimCard> extract_claims(const Query& query, const std::vector<DocView>& docs,
                                      Backend& backend, const PromptSet& prompts,
                                      const ExtractorOptions& options) {
    if (docs.empty()) {
        throw InputError("extract_claims: no documents");
    }
    if (query.text.empty()) {
        throw InputError("extract_claims: empty query text");
    }

    std::vector<DocView> ordered = docs;
    std::sort(ordered.begin(), ordered.end(),
              [](const DocView& a, const DocView& b) { return a.retrieval_rank < b.retrieval_rank; });

    std::vector<ClaimCard> cards;
    for (const auto& doc : ordered) {
        std::string text = doc.text;
        if (text.size() > options.doc_char_budget) {
            text.resize(options.doc_char_budget);
        }
        ChatRequest req;
        req.role = Role::extractor;
        req.temperature = default_temperature(Role::extractor);
        req.user_content = PromptSet::fill(prompts.for_role(Role::extractor),
                                           {{"[query]", query.text}, {"[documents_text]", text}});

        std::string response;
        try {
            response = backend.chat_complete(req);
        } catch (const BackendError& e) {
            // One unreachable backend call poisons the whole batch: the query
            // is un-processable, not silently empty.
            throw StageError("extractor", e.what(), true);
        } catch (const ProtocolError& e) {
            throw StageError("extractor", e.what(), true);
        } catch (const Error& e) {
            throw StageError("extractor", e.what());
        }

        nlohmann::json records;
        try {
            records = nlohmann::json::parse(response);
        } catch (const nlohmann::json::exception&) {
            std::cerr << "[cordon] warning: unparseable extraction output for " << doc.doc_id
                      << "; dropped\n";
            continue;
        }
        if (!records.is_array()) {
            std::cerr << "[cordon] warning: extraction output for " << doc.doc_id
                      << " is not a list; dropped\n";
            continue;
        }

        int claim_index = 0;
        for (const auto& record : records) {
            ClaimCard card;
            try {
                card = parse_claim_card(record);
            } catch (const ParseError& e) {
                std::cerr << "[cordon] warning: dropped claim record from " << doc.doc_id << ": "
                          << e.what() << "\n";
                continue;
            }
            ++claim_index;
            card.claim_id =
                "doc_" + std::to_string(doc.retrieval_rank) + "_claim_" + std::to_string(claim_index);
            card.source_doc = doc.doc_id;
            card.retrieval_rank = doc.retrieval_rank;
            cards.push_back(std::move(card));
        }
    }
    return cards;
}

}  // namespace cordon
