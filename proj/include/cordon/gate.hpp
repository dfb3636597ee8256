#pragma once

#include <vector>

#include "cordon/backend.hpp"
#include "cordon/prompts.hpp"
#include "cordon/text.hpp"
#include "cordon/types.hpp"

namespace cordon {

/// Classifies the certified evidence set without answering the query.
/// Deterministic pre-checks run before any backend call:
///   - zero certified claims                         -> INSUFFICIENT
///   - all claims single-source and min conf < 0.5   -> INSUFFICIENT
///   - certified polarity-conflict pair              -> CONFLICTING
/// Backend failure fails closed to INSUFFICIENT.
GateDecision gate_decide(const Query& query, const std::vector<AuditedClaim>& certified,
                         Backend& backend, const PromptSet& prompts,
                         const EntityNormalizer& normalizer,
                         const RelationEquivalence& relations);

/// The CONFLICTING pre-check predicate, exposed for reuse: same normalized
/// entity, opposite negation polarity on matching base relations, object
/// Jaccard > 0.5.
bool polarity_conflict_pair(const ClaimCard& a, const ClaimCard& b,
                            const EntityNormalizer& normalizer,
                            const RelationEquivalence& relations);

}  // namespace cordon
