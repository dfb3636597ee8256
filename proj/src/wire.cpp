#include "cordon/wire.hpp"

#include <fstream>
#include <ostream>

#include "cordon/errors.hpp"

namespace cordon {

namespace {

std::string require_string(const nlohmann::json& record, const char* field) {
    if (!record.contains(field)) {
        throw ParseError(std::string("claim record missing required field: ") + field);
    }
    const auto& v = record.at(field);
    if (!v.is_string()) {
        throw ParseError(std::string("claim record field is not a string: ") + field);
    }
    return v.get<std::string>();
}

}  // namespace

ClaimCard parse_claim_card(const nlohmann::json& record, ParseWarnings* warnings) {
    if (!record.is_object()) {
        throw ParseError("claim record is not an object");
    }
    ClaimCard card;
    card.claim_id = require_string(record, "claim_id");
    card.entity = require_string(record, "entity");
    card.relation = require_string(record, "relation");
    card.object = require_string(record, "object");
    card.source_doc = require_string(record, "source_doc");

    if (record.contains("claim_text")) {
        if (!record.at("claim_text").is_string()) {
            throw ParseError("claim record field is not a string: claim_text");
        }
        card.claim_text = record.at("claim_text").get<std::string>();
    } else {
        card.claim_text = card.entity + " " + card.relation + " " + card.object;
    }

    if (record.contains("confidence")) {
        const auto& c = record.at("confidence");
        if (!c.is_number()) {
            throw ParseError("claim record field is not a number: confidence");
        }
        double conf = c.get<double>();
        if (conf < 0.0 || conf > 1.0) {
            conf = conf < 0.0 ? 0.0 : 1.0;
            if (warnings) {
                warnings->clamped_confidence = true;
                warnings->messages.push_back("confidence clamped to [0,1] for " + card.claim_id);
            }
        }
        card.confidence = conf;
    } else {
        card.confidence = 0.5;  // neutral prior when the model omits it
    }

    if (record.contains("retrieval_rank")) {
        const auto& r = record.at("retrieval_rank");
        if (!r.is_number_integer()) {
            throw ParseError("claim record field is not an integer: retrieval_rank");
        }
        card.retrieval_rank = r.get<int>();
    }
    return card;
}

ClaimCard parse_claim_card(const std::string& serialized, ParseWarnings* warnings) {
    nlohmann::json record;
    try {
        record = nlohmann::json::parse(serialized);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("claim record is not valid JSON: ") + e.what());
    }
    return parse_claim_card(record, warnings);
}

nlohmann::ordered_json claim_card_to_json(const ClaimCard& card) {
    auto check = [](const std::string& value, const char* field) {
        if (value.empty()) {
            throw SerializeError(std::string("claim card has empty required field: ") + field);
        }
    };
    check(card.claim_id, "claim_id");
    check(card.entity, "entity");
    check(card.relation, "relation");
    check(card.object, "object");
    check(card.source_doc, "source_doc");
    if (card.confidence < 0.0 || card.confidence > 1.0) {
        throw SerializeError("claim card confidence out of [0,1]: " + card.claim_id);
    }
    nlohmann::ordered_json out;
    out["claim_id"] = card.claim_id;
    out["entity"] = card.entity;
    out["relation"] = card.relation;
    out["object"] = card.object;
    out["claim_text"] = card.claim_text;
    out["source_doc"] = card.source_doc;
    out["retrieval_rank"] = card.retrieval_rank;
    out["confidence"] = card.confidence;
    return out;
}

std::string serialize_claim_card(const ClaimCard& card) {
    return claim_card_to_json(card).dump();
}

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open file: " + path.string());
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": malformed record: " + e.what());
        }
        fn(lineno, record);
    }
}

void write_jsonl_line(std::ostream& out, const nlohmann::ordered_json& record) {
    out << record.dump() << "\n";
}

}  // namespace cordon
