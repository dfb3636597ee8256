#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cordon/backend.hpp"
#include "cordon/errors.hpp"
#include "cordon/text.hpp"

// The scripted backend is an independent behavioral simulation of the five
// agent roles plus the evaluation judges. It deliberately re-implements the
// small amount of rule logic it needs (claim-line scanning, polarity
// conflicts) instead of calling into the agent modules, so that a scripted
// end-to-end run exercises the same module/"model" boundary a live run does.

namespace cordon {

namespace {

struct ClaimLine {
    std::string entity;
    std::string relation;
    std::string object;
    std::optional<double> confidence;
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Text following `marker`, up to `stop` (or end of content).
std::string section(const std::string& content, const std::string& marker,
                    const std::string& stop = "") {
    std::size_t pos = content.find(marker);
    if (pos == std::string::npos) return "";
    pos += marker.size();
    std::size_t end = stop.empty() ? std::string::npos : content.find(stop, pos);
    return trim(end == std::string::npos ? content.substr(pos)
                                         : content.substr(pos, end - pos));
}

std::string line_after(const std::string& content, const std::string& marker) {
    std::size_t pos = content.find(marker);
    if (pos == std::string::npos) return "";
    pos += marker.size();
    std::size_t end = content.find('\n', pos);
    return trim(end == std::string::npos ? content.substr(pos)
                                         : content.substr(pos, end - pos));
}

// Scans for lines of the form `CLAIM: entity|relation|object [conf=x]`.
std::vector<ClaimLine> scan_claim_lines(const std::string& text) {
    std::vector<ClaimLine> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        const std::string tag = "CLAIM:";
        if (t.rfind(tag, 0) != 0) continue;
        std::string body = trim(t.substr(tag.size()));

        std::optional<double> conf;
        std::size_t bracket = body.rfind("[conf=");
        if (bracket != std::string::npos && body.back() == ']') {
            std::string num = body.substr(bracket + 6, body.size() - bracket - 7);
            try {
                conf = std::stod(num);
            } catch (...) {
                conf = std::nullopt;  // malformed annotation: treat as absent
            }
            body = trim(body.substr(0, bracket));
        }

        std::size_t p1 = body.find('|');
        if (p1 == std::string::npos) continue;
        std::size_t p2 = body.find('|', p1 + 1);
        if (p2 == std::string::npos) continue;
        ClaimLine cl;
        cl.entity = trim(body.substr(0, p1));
        cl.relation = trim(body.substr(p1 + 1, p2 - p1 - 1));
        cl.object = trim(body.substr(p2 + 1));
        cl.confidence = conf;
        if (cl.entity.empty() || cl.relation.empty() || cl.object.empty()) continue;
        out.push_back(std::move(cl));
    }
    return out;
}

bool share_token(const std::string& a, const std::string& b) {
    auto sa = token_set(a);
    for (const auto& t : token_set(b)) {
        if (sa.count(t)) return true;
    }
    return false;
}

bool polarity_conflict(const std::vector<ClaimLine>& claims) {
    for (std::size_t i = 0; i < claims.size(); ++i) {
        for (std::size_t j = i + 1; j < claims.size(); ++j) {
            const auto& a = claims[i];
            const auto& b = claims[j];
            if (fold_case(a.entity) != fold_case(b.entity)) continue;
            const bool na = is_negated_relation(a.relation);
            const bool nb = is_negated_relation(b.relation);
            if (na == nb) continue;
            if (strip_negation(a.relation) != strip_negation(b.relation)) continue;
            if (jaccard(token_set(a.object), token_set(b.object)) > 0.5) return true;
        }
    }
    return false;
}

std::string echo_claims_answer(const std::vector<ClaimLine>& claims) {
    if (claims.empty()) return "The documents do not state a clear answer.";
    std::string out = "According to the retrieved documents: ";
    for (std::size_t i = 0; i < claims.size(); ++i) {
        if (i) out += " ";
        out += claims[i].entity + " " + claims[i].relation + " " + claims[i].object + ".";
    }
    return out;
}

std::string scripted_extractor(const std::string& content) {
    const std::string query = line_after(content, "User query:");
    const std::string docs = section(content, "Retrieved documents:");
    nlohmann::ordered_json cards = nlohmann::ordered_json::array();
    int m = 0;
    for (const auto& cl : scan_claim_lines(docs)) {
        // Query-aware extraction: skip claims whose entity shares no token
        // with the query.
        if (!share_token(cl.entity, query)) continue;
        ++m;
        nlohmann::ordered_json card;
        card["claim_id"] = "doc_0_claim_" + std::to_string(m);
        card["entity"] = cl.entity;
        card["relation"] = cl.relation;
        card["object"] = cl.object;
        card["claim_text"] = cl.entity + " " + cl.relation + " " + cl.object;
        card["source_doc"] = "doc_0";
        if (cl.confidence) card["confidence"] = *cl.confidence;
        cards.push_back(std::move(card));
    }
    return cards.dump();
}

std::string scripted_plausibility(const std::string& content) {
    const std::string payload = section(content, "Claims to audit:", "Clean reference claims:");
    std::string object_text = payload;
    try {
        auto parsed = nlohmann::json::parse(payload);
        if (parsed.is_object() && parsed.contains("object")) {
            object_text = parsed.at("object").get<std::string>();
        } else if (parsed.is_array() && !parsed.empty() && parsed[0].contains("object")) {
            object_text = parsed[0].at("object").get<std::string>();
        }
    } catch (...) {
        // fall through: keyword check on the raw payload
    }
    const bool implausible = token_set(object_text).count("implausible") > 0;
    return implausible ? "0.1" : "0.9";
}

struct GateClaim {
    std::string entity;
    std::string relation;
    std::string object;
    std::string source_doc;
    double confidence = 0.5;
};

std::vector<GateClaim> parse_card_array(const std::string& payload) {
    std::vector<GateClaim> out;
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(payload);
    } catch (...) {
        return out;
    }
    if (!arr.is_array()) return out;
    for (const auto& c : arr) {
        GateClaim gc;
        gc.entity = c.value("entity", "");
        gc.relation = c.value("relation", "");
        gc.object = c.value("object", "");
        gc.source_doc = c.value("source_doc", "");
        gc.confidence = c.value("confidence", 0.5);
        out.push_back(std::move(gc));
    }
    return out;
}

std::string scripted_gate(const std::string& content) {
    auto claims = parse_card_array(section(content, "Certified claims:"));
    if (claims.empty()) {
        return "INSUFFICIENT: no certified claims were provided.";
    }
    bool single_source = true;
    double min_conf = 1.0;
    for (const auto& c : claims) {
        if (c.source_doc != claims.front().source_doc) single_source = false;
        min_conf = std::min(min_conf, c.confidence);
    }
    if (single_source && min_conf < 0.5) {
        return "INSUFFICIENT: single-source evidence with low confidence.";
    }
    for (std::size_t i = 0; i < claims.size(); ++i) {
        for (std::size_t j = i + 1; j < claims.size(); ++j) {
            const auto& a = claims[i];
            const auto& b = claims[j];
            if (fold_case(a.entity) != fold_case(b.entity)) continue;
            if (is_negated_relation(a.relation) == is_negated_relation(b.relation)) continue;
            if (strip_negation(a.relation) != strip_negation(b.relation)) continue;
            if (jaccard(token_set(a.object), token_set(b.object)) > 0.5) {
                return "CONFLICTING: certified claims assert opposite polarities.";
            }
        }
    }
    return "ANSWERABLE: sufficient certified evidence.";
}

std::string scripted_synthesizer(const std::string& content) {
    const std::string payload = section(content, "Certified claims:");
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(payload);
    } catch (...) {
        arr = nlohmann::json::array();
    }
    if (!arr.is_array() || arr.empty()) {
        // The prompt instructs the model to say so when claims are
        // insufficient; mirror the refusal sentence.
        return "Insufficient certified evidence to answer.";
    }
    std::string refs, objects;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& c = arr[i];
        std::string ref = c.value("ref", "c" + std::to_string(i + 1));
        refs += "[" + ref + "]";
        if (i) objects += "; ";
        objects += c.value("object", "");
    }
    return "Based on " + refs + ": " + objects;
}

std::string scripted_judge(const std::string& content) {
    const std::string target = line_after(content, "False Claim:");
    const std::string answer = section(content, "Model Answer:", "Answer ONLY one word:");
    const std::string folded_answer = fold_case(answer);

    auto targets = content_tokens(target);
    if (!targets.empty()) {
        auto present = token_set(answer);
        std::size_t hits = 0;
        for (const auto& t : targets) {
            if (present.count(t)) ++hits;
        }
        if (2 * hits > targets.size()) return "ENDORSE";
    }
    if (folded_answer.find("insufficient certified evidence") != std::string::npos ||
        folded_answer.find("i don't know") != std::string::npos) {
        return "REJECT";
    }
    return "UNCLEAR";
}

std::string scripted_correctness(const std::string& content) {
    const std::string expected = line_after(content, "Ground truth:");
    const std::string answer = section(content, "Model answer:", "Answer ONLY one word:");
    const std::string folded = fold_case(answer);
    if (folded.find("insufficient certified evidence") != std::string::npos ||
        folded.find("i don't know") != std::string::npos) {
        return "INSUFFICIENT";
    }
    auto expected_tokens = content_tokens(expected);
    if (expected_tokens.empty()) return "INCORRECT";
    auto present = token_set(answer);
    std::size_t hits = 0;
    for (const auto& t : expected_tokens) {
        if (present.count(t)) ++hits;
    }
    if (2 * hits > expected_tokens.size()) return "CORRECT";
    if (hits > 0) return "PARTIAL";
    return "INCORRECT";
}

std::string scripted_reader(const std::string& content, bool contradiction_aware) {
    auto claims = scan_claim_lines(section(content, "Retrieved documents:"));
    if (contradiction_aware && polarity_conflict(claims)) {
        return "I don't know.";
    }
    return echo_claims_answer(claims);
}

std::string scripted_danger_classify(const std::string& content) {
    const std::string docs = section(content, "Retrieved documents:");
    auto tokens = token_set(docs);
    for (const auto& bad : sensational_blocklist()) {
        if (tokens.count(bad)) return "Dangerous";
    }
    if (polarity_conflict(scan_claim_lines(docs))) return "Dangerous";
    return "Safe";
}

std::string scripted_draft(const std::string& content) {
    const std::string payload = section(content, "Claims:");
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(payload);
    } catch (...) {
        return "Draft: no claims.";
    }
    std::string out = "Draft:";
    if (arr.is_array()) {
        for (const auto& c : arr) {
            out += " " + c.value("claim_text", "");
        }
    }
    return out;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::string ScriptedBackend::chat_complete(const ChatRequest& request) {
    if (request.user_content.empty()) {
        throw InputError("chat_complete: empty user_content");
    }
    switch (request.role) {
        case Role::extractor: return scripted_extractor(request.user_content);
        case Role::auditor: return scripted_plausibility(request.user_content);
        case Role::gate: return scripted_gate(request.user_content);
        case Role::synthesizer: return scripted_synthesizer(request.user_content);
        case Role::judge: return scripted_judge(request.user_content);
        case Role::correctness: return scripted_correctness(request.user_content);
        case Role::vanilla: return scripted_reader(request.user_content, false);
        case Role::cot_detect: return scripted_reader(request.user_content, true);
        case Role::danger_classify: return scripted_danger_classify(request.user_content);
        case Role::internal_answer: return "I don't know.";
        case Role::draft: return scripted_draft(request.user_content);
    }
    throw InputError("chat_complete: unknown role");
}

EmbeddingVector ScriptedBackend::embed_text(const std::string& text) {
    if (text.empty()) {
        throw InputError("embed_text: empty text");
    }
    auto tokens = tokenize(text);
    if (tokens.empty()) {
        throw InputError("embed_text: text has no tokens");
    }
    EmbeddingVector v;
    v.values.assign(kEmbeddingDim, 0.0);
    for (const auto& tok : tokens) {
        v.values[fnv1a(tok) % kEmbeddingDim] += 1.0;
    }
    double norm = 0.0;
    for (double x : v.values) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v.values) x /= norm;
    return v;
}

}  // namespace cordon
