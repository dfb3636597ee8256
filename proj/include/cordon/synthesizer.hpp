#pragma once

#include <vector>

#include "cordon/backend.hpp"
#include "cordon/prompts.hpp"
#include "cordon/types.hpp"

namespace cordon {

inline constexpr const char* kRefusalText = "Insufficient certified evidence to answer.";

/// Generates the final answer exclusively from Gate-approved certified
/// claims. A non-ANSWERABLE decision produces an abstaining refusal with
/// no backend call. Citations ([cN]) are validated against the approved
/// set; an invalid citation triggers one regeneration, then a hard
/// StageError. The seed is forwarded to backends that support it
/// (synthesis runs at temperature 0.3). The signature accepts no
/// raw-document type.
Answer synthesize(const Query& query, const GateDecision& decision,
                  const std::vector<AuditedClaim>& approved, Backend& backend,
                  const PromptSet& prompts, std::optional<std::uint64_t> seed = {});

}  // namespace cordon
