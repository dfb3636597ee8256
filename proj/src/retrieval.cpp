#include "cordon/retrieval.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "cordon/errors.hpp"
#include "cordon/wire.hpp"

namespace cordon {

std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Corpus load_corpus(const std::filesystem::path& path) {
    Corpus corpus;
    for_each_jsonl(path, [&](std::size_t lineno, const nlohmann::json& record) {
        if (!record.contains("doc_id") || !record.at("doc_id").is_string() ||
            !record.contains("text") || !record.at("text").is_string()) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": corpus record needs string doc_id and text");
        }
        const std::string id = record.at("doc_id").get<std::string>();
        if (corpus.documents.count(id)) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": duplicate doc_id: " + id);
        }
        corpus.doc_ids.push_back(id);
        corpus.documents[id] = record.at("text").get<std::string>();
        if (record.contains("source") && record.at("source").is_string()) {
            corpus.metadata[id] = record.at("source").get<std::string>();
        }
    });
    return corpus;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
    std::vector<Query> queries;
    for_each_jsonl(path, [&](std::size_t lineno, const nlohmann::json& record) {
        Query q;
        q.query_id = record.value("query_id", "");
        q.text = record.value("text", "");
        if (q.query_id.empty() || q.text.empty()) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": query record needs non-empty query_id and text");
        }
        if (record.contains("target_false_claim")) {
            q.target_false_claim = record.at("target_false_claim").get<std::string>();
        }
        if (record.contains("target_triple")) {
            const auto& t = record.at("target_triple");
            q.target_triple = TargetTriple{t.value("entity", ""), t.value("relation", ""),
                                           t.value("object", "")};
        }
        if (record.contains("expected_answer")) {
            q.expected_answer = record.at("expected_answer").get<std::string>();
        }
        queries.push_back(std::move(q));
    });
    return queries;
}

std::map<std::string, std::vector<std::string>> load_run_file(const std::filesystem::path& path) {
    std::map<std::string, std::vector<std::pair<int, std::string>>> ranked;
    for_each_jsonl(path, [&](std::size_t lineno, const nlohmann::json& record) {
        if (!record.contains("query_id") || !record.contains("doc_id") ||
            !record.contains("rank")) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": run record needs query_id, doc_id, rank");
        }
        ranked[record.at("query_id").get<std::string>()].emplace_back(
            record.at("rank").get<int>(), record.at("doc_id").get<std::string>());
    });
    std::map<std::string, std::vector<std::string>> out;
    for (auto& [qid, entries] : ranked) {
        std::sort(entries.begin(), entries.end());
        auto& docs = out[qid];
        for (auto& [rank, doc_id] : entries) docs.push_back(std::move(doc_id));
    }
    return out;
}

RetrievalSet retrieve(const Query& query, const Corpus& corpus, int k, RetrievalMode mode,
                      Backend* embedder,
                      const std::map<std::string, std::vector<std::string>>* run) {
    if (k < 1) {
        throw InputError("retrieve: k must be >= 1");
    }
    RetrievalSet rs;
    rs.query_id = query.query_id;
    rs.k = k;

    std::vector<std::string> ordered;
    if (mode == RetrievalMode::precomputed) {
        if (run == nullptr) {
            throw InputError("retrieve: precomputed mode needs a run file");
        }
        auto it = run->find(query.query_id);
        if (it == run->end()) {
            throw InputError("retrieve: run file has no entry for query: " + query.query_id);
        }
        for (const auto& doc_id : it->second) {
            if (!corpus.documents.count(doc_id)) {
                throw InputError("retrieve: run file references unknown doc: " + doc_id);
            }
            ordered.push_back(doc_id);
        }
    } else {
        if (embedder == nullptr) {
            throw InputError("retrieve: embedding mode needs an embedding backend");
        }
        const EmbeddingVector qv = embedder->embed_text(query.text);
        std::vector<std::pair<double, std::string>> scored;
        scored.reserve(corpus.size());
        for (const auto& doc_id : corpus.doc_ids) {
            const EmbeddingVector dv = embedder->embed_text(corpus.documents.at(doc_id));
            scored.emplace_back(cosine_similarity(qv, dv), doc_id);
        }
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;  // ties: ascending doc_id
        });
        for (const auto& [score, doc_id] : scored) ordered.push_back(doc_id);
    }

    const std::size_t n = std::min<std::size_t>(ordered.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
        RawDocument doc;
        doc.doc_id = ordered[i];
        doc.text = corpus.documents.at(ordered[i]);
        doc.provenance = Provenance::clean;
        doc.retrieval_rank = static_cast<int>(i) + 1;
        rs.docs.push_back(std::move(doc));
    }
    return rs;
}

RetrievalSet inject_poison(const RetrievalSet& rs, const std::vector<RawDocument>& poison,
                           std::uint64_t seed) {
    if (poison.empty()) {
        throw InputError("inject_poison: poison set is empty");
    }
    if (poison.size() > static_cast<std::size_t>(rs.k)) {
        throw InputError("inject_poison: more poison docs than k");
    }
    {
        std::set<std::string> ids;
        for (const auto& d : rs.docs) ids.insert(d.doc_id);
        for (const auto& d : poison) {
            if (!ids.insert(d.doc_id).second) {
                throw InputError("inject_poison: duplicate doc_id: " + d.doc_id);
            }
        }
    }
    const std::size_t p = poison.size();
    const std::size_t keep = std::min(rs.docs.size(), static_cast<std::size_t>(rs.k) - p);
    const std::size_t n = keep + p;

    // mt19937_64 raw output with explicit modulo mapping keeps the draw
    // identical across standard libraries.
    std::mt19937_64 engine(seed);
    std::vector<std::size_t> slots(n);
    for (std::size_t i = 0; i < n; ++i) slots[i] = i;
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t idx = static_cast<std::size_t>(engine() % slots.size());
        chosen.push_back(slots[idx]);
        slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(idx));
    }

    std::vector<RawDocument> result(n);
    std::vector<bool> taken(n, false);
    for (std::size_t i = 0; i < p; ++i) {
        RawDocument doc = poison[i];
        doc.provenance = Provenance::poison;
        result[chosen[i]] = std::move(doc);
        taken[chosen[i]] = true;
    }
    std::size_t next_clean = 0;
    for (std::size_t slot = 0; slot < n; ++slot) {
        if (taken[slot]) continue;
        result[slot] = rs.docs[next_clean++];
    }
    for (std::size_t i = 0; i < n; ++i) {
        result[i].retrieval_rank = static_cast<int>(i) + 1;
    }

    RetrievalSet out;
    out.query_id = rs.query_id;
    out.k = rs.k;
    out.docs = std::move(result);
    return out;
}

}  // namespace cordon
