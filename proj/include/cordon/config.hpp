#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cordon/attack.hpp"
#include "cordon/auditor.hpp"
#include "cordon/backend.hpp"
#include "cordon/pipeline.hpp"
#include "cordon/retrieval.hpp"

namespace cordon {

struct AttackConfig {
    std::optional<AttackStrategy> strategy;  // absent: clean run
    int num_docs = 1;
    std::uint64_t seed = 0;
    std::string cache;  // for the cached strategy
    std::string consensus = "the earlier consensus held in the literature";
    std::string venue = "Journal of Applied Results";
};

struct BackendChoice {
    std::string type = "scripted";  // scripted | http
    HttpBackendConfig http;
};

struct ExperimentConfig {
    std::string mode = "full";
    int k = 10;
    std::uint64_t seed = 42;
    AuditThresholds thresholds;
    bool auditor_enhanced = false;
    std::string influence_proxy = "concat";  // concat | llm_draft
    std::vector<std::vector<std::string>> extra_relation_classes;
    std::vector<std::pair<std::string, std::string>> abbreviations;
    AttackConfig attack;
    BackendChoice backend;
    std::string corpus_path;
    std::string queries_path;
    std::string retrieval_mode = "embedding";  // embedding | precomputed
    std::string run_file;
    std::string prompts_dir = "data/prompts";
    int concurrency = 1;
    double invariant_check_rate = 1.0;
    std::size_t doc_char_budget = 4000;
    bool verbose_stats = false;
    std::string sabotage = "none";
    std::string output_dir = "out";

    nlohmann::json raw;  // the resolved configuration as loaded

    PipelineOptions pipeline_options() const;  // validated, typed view
};

/// Loads and validates a config file; validation errors name the offending
/// field path (e.g. "thresholds.reject").
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

/// Parses a JSON config object (already merged with overrides).
ExperimentConfig parse_config(const nlohmann::json& j);

/// Applies one `key=value` override with a dotted path into the raw JSON.
void apply_override(nlohmann::json& j, const std::string& assignment);

std::unique_ptr<Backend> make_backend(const BackendChoice& choice);

}  // namespace cordon
