#pragma once

#include <string>
#include <vector>

#include "cordon/backend.hpp"
#include "cordon/prompts.hpp"
#include "cordon/types.hpp"

namespace cordon {

struct ExtractorOptions {
    // Per-document character budget for prompt construction. Not from the
    // paper; long documents are truncated to this many characters.
    std::size_t doc_char_budget = 4000;
};

/// Converts retrieved documents into claim cards, one backend call per
/// document. The only operation in the system that reads raw document
/// text. Malformed records are dropped with a warning; claim ids are
/// re-keyed as doc_<rank>_claim_<m>; source_doc is forced to the actual
/// document id. Backend failure aborts the whole batch (StageError).
std::vector<ClaimCard> extract_claims(const Query& query, const std::vector<DocView>& docs,
                                      Backend& backend, const PromptSet& prompts,
                                      const ExtractorOptions& options = {});

}  // namespace cordon
