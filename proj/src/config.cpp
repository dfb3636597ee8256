#include "cordon/config.hpp"

#include <cstdlib>
#include <fstream>

#include "cordon/errors.hpp"

namespace cordon {

namespace {

void require_range(double value, double lo, double hi, const std::string& field) {
    if (value < lo || value > hi) {
        throw ConfigError(field + ": value " + std::to_string(value) + " outside [" +
                          std::to_string(lo) + "," + std::to_string(hi) + "]");
    }
}

}  // namespace

PipelineOptions ExperimentConfig::pipeline_options() const {
    PipelineOptions options;
    options.mode = pipeline_mode_from_string(mode);
    options.audit.mode = auditor_enhanced ? AuditMode::enhanced : AuditMode::base;
    options.audit.thresholds = thresholds;
    options.audit.proxy =
        influence_proxy == "llm_draft" ? InfluenceProxy::llm_draft : InfluenceProxy::concat;
    for (const auto& cls : extra_relation_classes) {
        options.audit.relations.add_class(std::set<std::string>(cls.begin(), cls.end()));
    }
    for (const auto& [abbrev, expansion] : abbreviations) {
        options.audit.normalizer.add_abbreviation(abbrev, expansion);
    }
    options.extractor.doc_char_budget = doc_char_budget;
    options.sabotage = sabotage == "leak_raw_text_to_synthesizer"
                           ? SabotageMode::leak_raw_text_to_synthesizer
                           : SabotageMode::none;
    options.seed = seed;
    return options;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.raw = j;
    cfg.mode = j.value("mode", cfg.mode);
    try {
        pipeline_mode_from_string(cfg.mode);
    } catch (const ConfigError&) {
        throw ConfigError("mode: unknown value '" + cfg.mode + "'");
    }
    cfg.k = j.value("k", cfg.k);
    if (cfg.k < 1) throw ConfigError("k: must be >= 1");
    cfg.seed = j.value("seed", cfg.seed);

    if (j.contains("thresholds")) {
        const auto& t = j.at("thresholds");
        cfg.thresholds.reject = t.value("reject", cfg.thresholds.reject);
        cfg.thresholds.uncertain = t.value("uncertain", cfg.thresholds.uncertain);
        cfg.thresholds.plausibility_floor =
            t.value("plausibility_floor", cfg.thresholds.plausibility_floor);
        require_range(cfg.thresholds.reject, 0.0, 1.0, "thresholds.reject");
        require_range(cfg.thresholds.uncertain, 0.0, 1.0, "thresholds.uncertain");
        require_range(cfg.thresholds.plausibility_floor, 0.0, 1.0,
                      "thresholds.plausibility_floor");
        if (cfg.thresholds.uncertain > cfg.thresholds.reject) {
            throw ConfigError("thresholds.uncertain: must not exceed thresholds.reject");
        }
    }

    if (j.contains("auditor")) {
        const auto& a = j.at("auditor");
        cfg.auditor_enhanced = a.value("enhanced", cfg.auditor_enhanced);
        cfg.influence_proxy = a.value("influence_proxy", cfg.influence_proxy);
        if (cfg.influence_proxy != "concat" && cfg.influence_proxy != "llm_draft") {
            throw ConfigError("auditor.influence_proxy: unknown value '" + cfg.influence_proxy +
                              "'");
        }
        if (a.contains("relation_classes")) {
            for (const auto& cls : a.at("relation_classes")) {
                cfg.extra_relation_classes.push_back(cls.get<std::vector<std::string>>());
            }
        }
        if (a.contains("abbreviations")) {
            for (const auto& [abbrev, expansion] : a.at("abbreviations").items()) {
                cfg.abbreviations.emplace_back(abbrev, expansion.get<std::string>());
            }
        }
    }

    if (j.contains("attack")) {
        const auto& a = j.at("attack");
        const std::string strategy = a.value("strategy", "none");
        if (strategy != "none") {
            try {
                cfg.attack.strategy = attack_strategy_from_string(strategy);
            } catch (const ConfigError&) {
                throw ConfigError("attack.strategy: unknown value '" + strategy + "'");
            }
        }
        cfg.attack.num_docs = a.value("num_docs", cfg.attack.num_docs);
        if (cfg.attack.num_docs < 1) throw ConfigError("attack.num_docs: must be >= 1");
        cfg.attack.seed = a.value("seed", cfg.seed);
        cfg.attack.cache = a.value("cache", cfg.attack.cache);
        cfg.attack.consensus = a.value("consensus", cfg.attack.consensus);
        cfg.attack.venue = a.value("venue", cfg.attack.venue);
        if (cfg.attack.strategy == AttackStrategy::cached && cfg.attack.cache.empty()) {
            throw ConfigError("attack.cache: required for the cached strategy");
        }
    }

    if (j.contains("backend")) {
        const auto& b = j.at("backend");
        cfg.backend.type = b.value("type", cfg.backend.type);
        if (cfg.backend.type != "scripted" && cfg.backend.type != "http") {
            throw ConfigError("backend.type: unknown value '" + cfg.backend.type + "'");
        }
        cfg.backend.http.base_url = b.value("base_url", cfg.backend.http.base_url);
        cfg.backend.http.model = b.value("model", cfg.backend.http.model);
        cfg.backend.http.embedding_model =
            b.value("embedding_model", cfg.backend.http.embedding_model);
        if (b.contains("models")) {
            for (const auto& [role, model] : b.at("models").items()) {
                cfg.backend.http.models_by_role[role] = model.get<std::string>();
            }
        }
        cfg.backend.http.max_retries = b.value("max_retries", cfg.backend.http.max_retries);
        cfg.backend.http.backoff_base_ms =
            b.value("backoff_base_ms", cfg.backend.http.backoff_base_ms);
        cfg.backend.http.timeout_seconds =
            b.value("timeout_seconds", cfg.backend.http.timeout_seconds);
        cfg.backend.http.max_inflight = b.value("max_inflight", cfg.backend.http.max_inflight);
        if (cfg.backend.type == "http" && cfg.backend.http.base_url.empty()) {
            throw ConfigError("backend.base_url: required for the http backend");
        }
    }

    if (j.contains("data")) {
        const auto& d = j.at("data");
        cfg.corpus_path = d.value("corpus", cfg.corpus_path);
        cfg.queries_path = d.value("queries", cfg.queries_path);
        cfg.retrieval_mode = d.value("retrieval_mode", cfg.retrieval_mode);
        cfg.run_file = d.value("run_file", cfg.run_file);
        if (cfg.retrieval_mode != "embedding" && cfg.retrieval_mode != "precomputed") {
            throw ConfigError("data.retrieval_mode: unknown value '" + cfg.retrieval_mode + "'");
        }
        if (cfg.retrieval_mode == "precomputed" && cfg.run_file.empty()) {
            throw ConfigError("data.run_file: required for precomputed retrieval");
        }
    }
    if (cfg.corpus_path.empty()) throw ConfigError("data.corpus: required");
    if (cfg.queries_path.empty()) throw ConfigError("data.queries: required");

    cfg.prompts_dir = j.value("prompts_dir", cfg.prompts_dir);
    cfg.concurrency = j.value("concurrency", cfg.concurrency);
    if (cfg.concurrency < 1) throw ConfigError("concurrency: must be >= 1");
    cfg.invariant_check_rate = j.value("invariant_check_rate", cfg.invariant_check_rate);
    require_range(cfg.invariant_check_rate, 0.0, 1.0, "invariant_check_rate");
    cfg.doc_char_budget = j.value("doc_char_budget", cfg.doc_char_budget);
    cfg.verbose_stats = j.value("verbose_stats", cfg.verbose_stats);
    cfg.sabotage = j.value("sabotage", cfg.sabotage);
    if (cfg.sabotage != "none" && cfg.sabotage != "leak_raw_text_to_synthesizer") {
        throw ConfigError("sabotage: unknown value '" + cfg.sabotage + "'");
    }
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    return cfg;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override must look like key.path=value: " + assignment);
    }
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    nlohmann::json* node = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) {
            throw ConfigError("override has an empty path segment: " + assignment);
        }
        if (dot == std::string::npos) {
            nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
            if (parsed.is_discarded() || parsed.is_object() || parsed.is_array()) {
                (*node)[key] = value;  // treat as a plain string
            } else {
                (*node)[key] = parsed;
            }
            return;
        }
        node = &((*node)[key]);
        start = dot + 1;
    }
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    for (const auto& assignment : overrides) {
        apply_override(j, assignment);
    }
    return parse_config(j);
}

std::unique_ptr<Backend> make_backend(const BackendChoice& choice) {
    if (choice.type == "scripted") {
        return std::make_unique<ScriptedBackend>();
    }
    HttpBackendConfig http = choice.http;
    if (const char* key = std::getenv("CORDON_API_KEY")) {
        http.api_key = key;  // credentials come from the environment only
    }
    if (const char* base = std::getenv("CORDON_API_BASE"); base && http.base_url.empty()) {
        http.base_url = base;
    }
    return std::make_unique<HttpBackend>(std::move(http));
}

}  // namespace cordon
