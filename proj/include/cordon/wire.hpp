#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cordon/types.hpp"

namespace cordon {

/// Non-fatal issues noticed while parsing a claim record.
struct ParseWarnings {
    std::vector<std::string> messages;
    bool clamped_confidence = false;
};

/// Parses one claim record in the claim-card wire format (the field names
/// the Extractor prompt asks the model for). Required: claim_id, entity,
/// relation, object, source_doc. Optional: claim_text (defaults to
/// "entity relation object"), confidence (defaults to 0.5, clamped to
/// [0,1] with a warning), retrieval_rank. Unknown fields are ignored.
/// Throws ParseError naming the missing/malformed field.
ClaimCard parse_claim_card(const nlohmann::json& record, ParseWarnings* warnings = nullptr);
ClaimCard parse_claim_card(const std::string& serialized, ParseWarnings* warnings = nullptr);

/// Serializes a valid card so that parse_claim_card(serialize_claim_card(c)) == c.
/// Throws SerializeError on invariant violations (empty required field,
/// confidence out of range).
std::string serialize_claim_card(const ClaimCard& card);
nlohmann::ordered_json claim_card_to_json(const ClaimCard& card);

// JSON Lines helpers shared by corpus/query/cache/report files.
// The visitor receives (1-based line number, parsed object).
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn);
void write_jsonl_line(std::ostream& out, const nlohmann::ordered_json& record);

}  // namespace cordon
