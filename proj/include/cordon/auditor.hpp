#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cordon/backend.hpp"
#include "cordon/prompts.hpp"
#include "cordon/text.hpp"
#include "cordon/types.hpp"

namespace cordon {

struct AuditThresholds {
    double reject = 0.65;             // R > reject  -> rejected
    double uncertain = 0.45;          // uncertain < R <= reject -> uncertain
    double plausibility_floor = 0.3;  // plausibility < floor -> clamp R to >= 0.7
    double clamp_risk = 0.7;
    double uniform_agreement_risk = 0.6;
};

enum class AuditMode { base, enhanced };
enum class InfluenceProxy { concat, llm_draft };

struct AuditOptions {
    AuditMode mode = AuditMode::base;
    AuditThresholds thresholds;
    InfluenceProxy proxy = InfluenceProxy::concat;
    EntityNormalizer normalizer;
    RelationEquivalence relations;
};

/// Cross-source claim agreement. False for same-source pairs; otherwise
/// true iff normalized entities match, relations match case-insensitively
/// or share an equivalence class, and object Jaccard overlap is > 0.5
/// (strict).
bool semantic_agree(const ClaimCard& a, const ClaimCard& b, const EntityNormalizer& normalizer,
                    const RelationEquivalence& relations);

/// Fraction of same-entity claims from other source documents that
/// semantically agree with c; 0 when no such claims exist.
double cross_source_support(const ClaimCard& c, const std::vector<ClaimCard>& all_claims,
                            const EntityNormalizer& normalizer,
                            const RelationEquivalence& relations);

/// 1 - cosine between the claim-bag proxy with and without c, clamped to
/// [0,1]. Removing the only claim yields 1. The default proxy is the
/// rank-ordered concatenation of claim texts; llm_draft asks the backend
/// for a one-line draft instead.
double marginal_influence(const ClaimCard& c, const std::vector<ClaimCard>& all_claims,
                          Backend& backend, InfluenceProxy proxy = InfluenceProxy::concat,
                          const PromptSet* prompts = nullptr);

/// R = I * (1 - S) plus the verdict from the threshold table. Throws
/// InputError when S or I is outside [0,1].
std::pair<double, AuditVerdict> risk_score(double support, double influence,
                                           const AuditThresholds& thresholds = {});

/// Enhanced-mode factual plausibility via the auditor role. Unparseable
/// responses fall back to 0.5 (with *warned set). Scripted backends follow
/// the rule table (0.1 for objects containing the IMPLAUSIBLE token,
/// else 0.9).
double assess_plausibility(const ClaimCard& c, const std::vector<ClaimCard>& others,
                           Backend& backend, const PromptSet& prompts, bool* warned = nullptr);

struct AuditResult {
    std::vector<AuditedClaim> claims;
    bool uniform_agreement = false;
};

/// Scores every claim of one query. In enhanced mode the plausibility
/// clamp forces R to max(R, 0.7) when plausibility < 0.3, and the
/// uniform-agreement rule raises every risk to >= 0.6 when all claims
/// pairwise agree across sources and all plausibilities are < 0.3.
AuditResult audit_claims(const std::vector<ClaimCard>& claims, const AuditOptions& options,
                         Backend& backend, const PromptSet& prompts);

std::vector<AuditedClaim> certified_claims(const AuditResult& result);

}  // namespace cordon
