#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cordon/backend.hpp"
#include "cordon/types.hpp"

namespace cordon {

struct Corpus {
    // Insertion order preserved for deterministic iteration.
    std::vector<std::string> doc_ids;
    std::map<std::string, std::string> documents;          // doc_id -> text
    std::map<std::string, std::string> metadata;           // doc_id -> source tag

    std::size_t size() const { return doc_ids.size(); }
};

struct RetrievalSet {
    std::string query_id;
    std::vector<RawDocument> docs;  // ranks 1..|docs|, no gaps
    int k = 0;
};

enum class RetrievalMode { embedding, precomputed };

/// JSON Lines: {"doc_id": ..., "text": ..., "source"?: ...}. Duplicate ids
/// and malformed lines raise errors naming the line.
Corpus load_corpus(const std::filesystem::path& path);

/// JSON Lines: {"query_id", "text", "target_false_claim"?, "target_triple"?,
/// "expected_answer"?}.
std::vector<Query> load_queries(const std::filesystem::path& path);

/// JSON Lines: {"query_id", "doc_id", "rank"}; grouped and rank-sorted.
std::map<std::string, std::vector<std::string>> load_run_file(const std::filesystem::path& path);

/// Top-k by embedding cosine (ties broken by ascending doc_id) or by a
/// precomputed run. Docs come back with provenance=clean and ranks 1..n.
RetrievalSet retrieve(const Query& query, const Corpus& corpus, int k, RetrievalMode mode,
                      Backend* embedder = nullptr,
                      const std::map<std::string, std::vector<std::string>>* run = nullptr);

/// Places poison docs at seeded uniform positions within the top-k set,
/// evicting the lowest-ranked clean docs to keep the context size at k.
/// Pure function of (rs, poison, seed). Throws InputError when
/// |poison| > rs.k or poison is empty.
RetrievalSet inject_poison(const RetrievalSet& rs, const std::vector<RawDocument>& poison,
                           std::uint64_t seed);

/// Stable 64-bit string hash used wherever per-query seeds are derived.
std::uint64_t stable_hash(const std::string& s);

}  // namespace cordon
