#include "cordon/auditor.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cordon/errors.hpp"
#include "cordon/wire.hpp"

namespace cordon {

bool semantic_agree(const ClaimCard& a, const ClaimCard& b, const EntityNormalizer& normalizer,
                    const RelationEquivalence& relations) {
    if (a.source_doc == b.source_doc) return false;
    if (normalizer.normalize(a.entity) != normalizer.normalize(b.entity)) return false;

    const std::string ra = fold_case(a.relation);
    const std::string rb = fold_case(b.relation);
    if (ra != rb && !relations.same_class(ra, rb)) return false;

    return jaccard(token_set(a.object), token_set(b.object)) > 0.5;
}

double cross_source_support(const ClaimCard& c, const std::vector<ClaimCard>& all_claims,
                            const EntityNormalizer& normalizer,
                            const RelationEquivalence& relations) {
    const std::string entity = normalizer.normalize(c.entity);
    std::size_t pool = 0;
    std::size_t agreeing = 0;
    for (const auto& other : all_claims) {
        if (other.source_doc == c.source_doc) continue;
        if (normalizer.normalize(other.entity) != entity) continue;
        ++pool;
        if (semantic_agree(c, other, normalizer, relations)) ++agreeing;
    }
    if (pool == 0) return 0.0;  // no independent corroboration exists
    return static_cast<double>(agreeing) / static_cast<double>(pool);
}

namespace {

std::string concat_proxy(const std::vector<ClaimCard>& claims, const ClaimCard* excluded) {
    std::string out;
    for (const auto& c : claims) {
        if (excluded != nullptr && c.claim_id == excluded->claim_id) continue;
        if (!out.empty()) out += ' ';
        out += c.claim_text;
    }
    return out;
}

std::string draft_proxy(const std::vector<ClaimCard>& claims, const ClaimCard* excluded,
                        Backend& backend, const PromptSet& prompts) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& c : claims) {
        if (excluded != nullptr && c.claim_id == excluded->claim_id) continue;
        arr.push_back(claim_card_to_json(c));
    }
    if (arr.empty()) return "";
    ChatRequest req;
    req.role = Role::draft;
    req.temperature = default_temperature(Role::draft);
    req.user_content = PromptSet::fill(prompts.for_role(Role::draft), {{"[claim_cards]", arr.dump()}});
    return backend.chat_complete(req);
}

}  // namespace

double marginal_influence(const ClaimCard& c, const std::vector<ClaimCard>& all_claims,
                          Backend& backend, InfluenceProxy proxy, const PromptSet* prompts) {
    if (all_claims.empty()) {
        throw InputError("marginal_influence: claim set is empty");
    }
    std::string with, without;
    if (proxy == InfluenceProxy::llm_draft) {
        if (prompts == nullptr) {
            throw InputError("marginal_influence: llm_draft proxy needs prompts");
        }
        with = draft_proxy(all_claims, nullptr, backend, *prompts);
        without = draft_proxy(all_claims, &c, backend, *prompts);
    } else {
        with = concat_proxy(all_claims, nullptr);
        without = concat_proxy(all_claims, &c);
    }
    if (without.empty()) return 1.0;  // removing the only claim: maximal influence
    const double cos = cosine_similarity(backend.embed_text(with), backend.embed_text(without));
    return std::clamp(1.0 - cos, 0.0, 1.0);
}

std::pair<double, AuditVerdict> risk_score(double support, double influence,
                                           const AuditThresholds& thresholds) {
    if (support < 0.0 || support > 1.0 || influence < 0.0 || influence > 1.0) {
        throw InputError("risk_score: support and influence must be in [0,1]");
    }
    const double risk = influence * (1.0 - support);
    AuditVerdict verdict;
    if (risk > thresholds.reject) {
        verdict = AuditVerdict::rejected;
    } else if (risk > thresholds.uncertain) {
        verdict = AuditVerdict::uncertain;
    } else {
        verdict = AuditVerdict::certified;
    }
    return {risk, verdict};
}

double assess_plausibility(const ClaimCard& c, const std::vector<ClaimCard>& others,
                           Backend& backend, const PromptSet& prompts, bool* warned) {
    nlohmann::ordered_json other_cards = nlohmann::ordered_json::array();
    for (const auto& o : others) {
        if (o.claim_id == c.claim_id) continue;
        other_cards.push_back(claim_card_to_json(o));
    }
    ChatRequest req;
    req.role = Role::auditor;
    req.temperature = default_temperature(Role::auditor);
    req.user_content = PromptSet::fill(prompts.auditor_enhanced(),
                                       {{"[claim_cards]", claim_card_to_json(c).dump()},
                                        {"[clean_claim_cards]", other_cards.dump()}});
    const std::string response = backend.chat_complete(req);

    // Accept either a bare number or a JSON body carrying factual_plausibility.
    try {
        auto parsed = nlohmann::json::parse(response);
        if (parsed.is_number()) return std::clamp(parsed.get<double>(), 0.0, 1.0);
        if (parsed.is_object() && parsed.contains("factual_plausibility")) {
            return std::clamp(parsed.at("factual_plausibility").get<double>(), 0.0, 1.0);
        }
    } catch (...) {
    }
    std::istringstream in(response);
    double value;
    if (in >> value) return std::clamp(value, 0.0, 1.0);

    if (warned != nullptr) *warned = true;
    std::cerr << "[cordon] warning: unparseable plausibility response for " << c.claim_id
              << "; defaulting to 0.5\n";
    return 0.5;
}

AuditResult audit_claims(const std::vector<ClaimCard>& claims, const AuditOptions& options,
                         Backend& backend, const PromptSet& prompts) {
    AuditResult result;
    result.claims.reserve(claims.size());

    for (const auto& c : claims) {
        AuditedClaim audited;
        audited.card = c;
        audited.support = cross_source_support(c, claims, options.normalizer, options.relations);
        audited.influence =
            marginal_influence(c, claims, backend, options.proxy, &prompts);
        auto [risk, verdict] = risk_score(audited.support, audited.influence, options.thresholds);
        audited.risk = risk;
        audited.verdict = verdict;

        if (options.mode == AuditMode::enhanced) {
            audited.plausibility = assess_plausibility(c, claims, backend, prompts);
            if (*audited.plausibility < options.thresholds.plausibility_floor) {
                audited.risk = std::max(audited.risk, options.thresholds.clamp_risk);
                audited.plausibility_clamped = true;
                audited.verdict = audited.risk > options.thresholds.reject
                                      ? AuditVerdict::rejected
                                      : AuditVerdict::uncertain;
            }
        }
        result.claims.push_back(std::move(audited));
    }

    // Uniform-agreement rule: every claim pairwise agrees across sources and
    // all plausibilities are below the floor.
    if (options.mode == AuditMode::enhanced && result.claims.size() >= 2) {
        bool all_dubious = true;
        for (const auto& a : result.claims) {
            if (!a.plausibility || *a.plausibility >= options.thresholds.plausibility_floor) {
                all_dubious = false;
                break;
            }
        }
        // Universality is judged over cross-source pairs (same-source pairs
        // cannot agree by definition); at least one such pair must exist.
        bool universal_agreement = all_dubious;
        std::size_t cross_pairs = 0;
        if (all_dubious) {
            for (std::size_t i = 0; i < claims.size() && universal_agreement; ++i) {
                for (std::size_t j = i + 1; j < claims.size(); ++j) {
                    if (claims[i].source_doc == claims[j].source_doc) continue;
                    ++cross_pairs;
                    if (!semantic_agree(claims[i], claims[j], options.normalizer,
                                        options.relations)) {
                        universal_agreement = false;
                        break;
                    }
                }
            }
        }
        if (universal_agreement && cross_pairs > 0) {
            result.uniform_agreement = true;
            for (auto& a : result.claims) {
                a.risk = std::max(a.risk, options.thresholds.uniform_agreement_risk);
                if (a.risk > options.thresholds.reject) {
                    a.verdict = AuditVerdict::rejected;
                } else if (a.risk > options.thresholds.uncertain) {
                    a.verdict = AuditVerdict::uncertain;
                }
            }
        }
    }
    return result;
}

std::vector<AuditedClaim> certified_claims(const AuditResult& result) {
    std::vector<AuditedClaim> out;
    for (const auto& a : result.claims) {
        if (a.verdict == AuditVerdict::certified) out.push_back(a);
    }
    return out;
}

}  // namespace cordon
