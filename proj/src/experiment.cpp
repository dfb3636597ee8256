#include "cordon/experiment.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <thread>

#include "cordon/errors.hpp"
#include "cordon/wire.hpp"

namespace cordon {

namespace {

struct PerQueryOutput {
    QueryResult result;
    QueryEvalDetail detail;
    std::set<std::string> poison_doc_ids;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
}

void write_timings(const std::vector<QueryResult>& results, const std::filesystem::path& dir) {
    nlohmann::ordered_json out;
    out["per_query"] = nlohmann::ordered_json::array();
    double total = 0.0;
    for (const auto& r : results) {
        nlohmann::ordered_json t;
        t["query_id"] = r.query_id;
        t["extract_ms"] = r.timings.extract_ms;
        t["audit_ms"] = r.timings.audit_ms;
        t["gate_ms"] = r.timings.gate_ms;
        t["synthesize_ms"] = r.timings.synthesize_ms;
        t["total_ms"] = r.timings.total_ms;
        out["per_query"].push_back(std::move(t));
        total += r.timings.total_ms;
    }
    out["total_ms"] = total;
    std::ofstream f(dir / "timings.json");
    if (f) f << out.dump(2) << "\n";
}

}  // namespace

ExperimentOutcome run_experiment_in_memory(const ExperimentConfig& config) {
    const PromptSet prompts = PromptSet::load(config.prompts_dir);
    auto backend = make_backend(config.backend);
    const Corpus corpus = load_corpus(config.corpus_path);
    const std::vector<Query> queries = load_queries(config.queries_path);

    std::map<std::string, std::vector<std::string>> run;
    const RetrievalMode retrieval_mode = config.retrieval_mode == "precomputed"
                                             ? RetrievalMode::precomputed
                                             : RetrievalMode::embedding;
    if (retrieval_mode == RetrievalMode::precomputed) {
        run = load_run_file(config.run_file);
    }

    const PipelineOptions pipeline = config.pipeline_options();
    std::vector<PerQueryOutput> outputs(queries.size());

    auto process = [&](std::size_t index) {
        const Query& query = queries[index];
        PerQueryOutput& out = outputs[index];
        out.detail.query_id = query.query_id;
        out.detail.poisoned = query.target_false_claim.has_value();

        try {
            RetrievalSet rs = retrieve(query, corpus, config.k, retrieval_mode, backend.get(),
                                       retrieval_mode == RetrievalMode::precomputed ? &run
                                                                                    : nullptr);
            if (config.attack.strategy && query.target_false_claim) {
                std::vector<RawDocument> poison;
                const std::uint64_t gen_seed = mix(config.attack.seed, stable_hash(query.query_id));
                if (*config.attack.strategy == AttackStrategy::cached) {
                    poison = load_cached_poison(config.attack.cache, query.query_id);
                } else {
                    AttackSpec spec;
                    spec.strategy = *config.attack.strategy;
                    spec.num_docs = config.attack.num_docs;
                    spec.target = *query.target_false_claim;
                    spec.seed = gen_seed;
                    poison = generate_poison(spec, query.target_triple, config.attack.consensus,
                                             config.attack.venue);
                }
                rs = inject_poison(rs, poison, mix(gen_seed, 0x5bd1e995u));
                for (const auto& doc : rs.docs) {
                    if (doc.provenance == Provenance::poison) {
                        out.poison_doc_ids.insert(doc.doc_id);
                    }
                }
            }

            out.result = run_query(query, rs, pipeline, *backend, prompts);

            // Invariant checking: always in evaluation builds unless the
            // configured sampling rate says otherwise (deterministic per query).
            const std::uint64_t draw = mix(config.seed, stable_hash(query.query_id)) % 1000000ull;
            if (static_cast<double>(draw) <
                config.invariant_check_rate * 1000000.0) {
                out.detail.invariant_violations = check_invariants(out.result);
            }

            out.detail.answered = !out.result.answer.abstained && !out.result.error;
            out.detail.abstained = out.result.answer.abstained;
            if (out.result.gate) out.detail.gate_state = out.result.gate->state;
            out.detail.n_extracted = static_cast<int>(out.result.extracted.size());
            for (const auto& a : out.result.audited) {
                switch (a.verdict) {
                    case AuditVerdict::certified: ++out.detail.n_certified; break;
                    case AuditVerdict::uncertain: ++out.detail.n_uncertain; break;
                    case AuditVerdict::rejected: ++out.detail.n_rejected; break;
                }
            }
            out.detail.chat_calls = out.result.chat_calls;
            out.detail.embed_calls = out.result.embed_calls;
            out.detail.error = out.result.error;

            if (out.detail.poisoned && !out.result.error) {
                try {
                    out.detail.verdict = judge_endorsement(
                        out.result.answer, *query.target_false_claim, *backend, prompts);
                    out.detail.judged = true;
                } catch (const Error& e) {
                    std::cerr << "[cordon] warning: judge failed for " << query.query_id << ": "
                              << e.what() << "\n";
                    out.result.backend_failure = true;
                }
            }
            if (!out.detail.poisoned && !out.result.error && query.expected_answer) {
                try {
                    out.detail.correctness = judge_correctness(
                        out.result.answer, *query.expected_answer, *backend, prompts);
                } catch (const Error& e) {
                    std::cerr << "[cordon] warning: correctness judge failed for "
                              << query.query_id << ": " << e.what() << "\n";
                }
            }
        } catch (const BackendError& e) {
            out.result.query_id = query.query_id;
            out.result.error = e.what();
            out.result.backend_failure = true;
            out.detail.error = out.result.error;
        } catch (const ProtocolError& e) {
            out.result.query_id = query.query_id;
            out.result.error = e.what();
            out.result.backend_failure = true;
            out.detail.error = out.result.error;
        } catch (const Error& e) {
            out.result.query_id = query.query_id;
            out.result.error = e.what();
            out.detail.error = out.result.error;
        }
    };

    if (config.concurrency <= 1 || queries.size() <= 1) {
        for (std::size_t i = 0; i < queries.size(); ++i) process(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= queries.size()) return;
                process(i);
            }
        };
        std::vector<std::thread> threads;
        const int n = std::min<int>(config.concurrency, static_cast<int>(queries.size()));
        threads.reserve(static_cast<std::size_t>(n));
        for (int t = 0; t < n; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    ExperimentOutcome outcome;
    ExperimentReport& report = outcome.report;
    report.mode = config.mode;
    report.seed = config.seed;
    report.k = config.k;
    report.total_queries = static_cast<long>(queries.size());

    std::vector<Verdict> verdicts;
    long clean_evaluable = 0;
    long correctness_answers = 0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        auto& out = outputs[i];
        const QueryEvalDetail& d = out.detail;
        if (d.poisoned) {
            ++report.poisoned_queries;
            if (d.judged && d.verdict) {
                ++report.judged;
                verdicts.push_back(*d.verdict);
                switch (*d.verdict) {
                    case Verdict::endorse: ++report.endorse; break;
                    case Verdict::reject: ++report.reject; break;
                    case Verdict::unclear: ++report.unclear; break;
                }
            } else {
                ++report.excluded_from_judgement;
            }
        } else {
            ++report.clean_queries;
            if (!d.error) {
                ++clean_evaluable;
                if (d.abstained) {
                    ++report.abstained_clean;
                } else {
                    ++report.answered_clean;
                }
            }
            if (d.correctness) {
                switch (*d.correctness) {
                    case CorrectnessLabel::correct:
                        ++report.correct;
                        ++correctness_answers;
                        break;
                    case CorrectnessLabel::partial:
                        ++report.partial;
                        ++correctness_answers;
                        break;
                    case CorrectnessLabel::incorrect:
                        ++report.incorrect;
                        ++correctness_answers;
                        break;
                    case CorrectnessLabel::insufficient:
                        break;  // refusals stay out of the denominator
                }
            }
        }
        report.invariant_violation_count += static_cast<long>(d.invariant_violations.size());
        if (out.result.backend_failure) ++report.backend_failures;
        report.chat_calls_total += d.chat_calls;
        report.embed_calls_total += d.embed_calls;

        outcome.results.push_back(out.result);
        outcome.ground_truth.poison_docs_by_query[d.query_id] = out.poison_doc_ids;
        report.details.push_back(out.detail);
    }

    if (report.judged > 0) {
        report.asr = compute_asr(verdicts);
        report.asr_wilson = wilson_ci(static_cast<int>(report.endorse),
                                      static_cast<int>(report.judged));
        report.asr_clopper_pearson = clopper_pearson_ci(static_cast<int>(report.endorse),
                                                        static_cast<int>(report.judged));
    }
    if (clean_evaluable > 0) {
        report.answerability_rate =
            static_cast<double>(report.answered_clean) / static_cast<double>(clean_evaluable);
        report.safety_refusal_rate =
            static_cast<double>(report.abstained_clean) / static_cast<double>(clean_evaluable);
    }
    if (correctness_answers > 0) {
        report.correctness_rate =
            static_cast<double>(report.correct) / static_cast<double>(correctness_answers);
    }
    report.cascade = cascade_metrics(outcome.results, outcome.ground_truth);

    if (report.invariant_violation_count > 0) {
        outcome.exit_code = 3;
    } else if (report.backend_failures > 0) {
        outcome.exit_code = 2;
    }
    return outcome;
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    ExperimentOutcome outcome = run_experiment_in_memory(config);
    emit_report(outcome.report, config.output_dir, config.verbose_stats);
    write_timings(outcome.results, config.output_dir);
    return outcome;
}

}  // namespace cordon
