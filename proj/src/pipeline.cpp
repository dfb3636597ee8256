#include "cordon/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "cordon/errors.hpp"
#include "cordon/gate.hpp"
#include "cordon/synthesizer.hpp"

namespace cordon {

std::string to_string(PipelineMode mode) {
    switch (mode) {
        case PipelineMode::full: return "full";
        case PipelineMode::no_gate: return "no_gate";
        case PipelineMode::no_auditor: return "no_auditor";
        case PipelineMode::vanilla: return "vanilla";
        case PipelineMode::cot_detect: return "cot_detect";
        case PipelineMode::danger_evaluator: return "danger_evaluator";
    }
    return "unknown";
}

PipelineMode pipeline_mode_from_string(const std::string& name) {
    for (PipelineMode m : {PipelineMode::full, PipelineMode::no_gate, PipelineMode::no_auditor,
                           PipelineMode::vanilla, PipelineMode::cot_detect,
                           PipelineMode::danger_evaluator}) {
        if (to_string(m) == name) return m;
    }
    throw ConfigError("unknown pipeline mode: " + name);
}

bool is_cordoned(PipelineMode mode) {
    return mode == PipelineMode::full || mode == PipelineMode::no_gate ||
           mode == PipelineMode::no_auditor;
}

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct FlowRecorder {
    std::vector<FlowEvent>& events;
    const std::string& query_id;

    void record(const char* sender, const char* receiver, PayloadKind kind) {
        FlowEvent ev;
        ev.sender = sender;
        ev.receiver = receiver;
        ev.payload_kind = kind;
        ev.query_id = query_id;
        ev.seq = events.size();
        events.push_back(std::move(ev));
    }
};

std::string join_documents(const std::vector<DocView>& docs, std::size_t char_budget) {
    std::string out;
    for (const auto& doc : docs) {
        std::string text = doc.text;
        if (text.size() > char_budget) text.resize(char_budget);
        if (!out.empty()) out += "\n\n";
        out += "[" + doc.doc_id + "]\n" + text;
    }
    return out;
}

bool reads_as_refusal(const std::string& text) {
    const std::string folded = fold_case(text);
    return folded.find("i don't know") != std::string::npos ||
           folded.find("insufficient certified evidence") != std::string::npos;
}

// One-call (or, for the danger evaluator, two-call) baseline paths: the
// model reads raw documents directly. These are the undefended controls;
// the flow log records the raw-text delivery faithfully.
void run_baseline(const Query& query, const std::vector<DocView>& views,
                  const PipelineOptions& options, Backend& backend, const PromptSet& prompts,
                  QueryResult& result, FlowRecorder& flow) {
    flow.record(agent::retrieval, agent::synthesizer, PayloadKind::raw_text);
    const std::string docs_text = join_documents(views, options.extractor.doc_char_budget);

    auto ask = [&](Role role, bool with_docs) {
        ChatRequest req;
        req.role = role;
        req.temperature = default_temperature(role);
        std::vector<std::pair<std::string, std::string>> slots = {{"[query]", query.text}};
        if (with_docs) slots.emplace_back("[documents_text]", docs_text);
        req.user_content = PromptSet::fill(prompts.for_role(role), slots);
        return backend.chat_complete(req);
    };

    std::string text;
    if (options.mode == PipelineMode::vanilla) {
        text = ask(Role::vanilla, true);
    } else if (options.mode == PipelineMode::cot_detect) {
        text = ask(Role::cot_detect, true);
    } else {  // danger_evaluator: classify, then answer from context or internally
        const std::string verdict = ask(Role::danger_classify, true);
        if (fold_case(verdict).find("dangerous") != std::string::npos) {
            text = ask(Role::internal_answer, false);
        } else {
            text = ask(Role::vanilla, true);
        }
    }
    result.answer.text = text;
    result.answer.abstained = reads_as_refusal(text);
    flow.record(agent::synthesizer, agent::user, PayloadKind::answer);
}

void run_cordoned(const Query& query, const std::vector<DocView>& views,
                  const PipelineOptions& options, Backend& backend, const PromptSet& prompts,
                  QueryResult& result, FlowRecorder& flow) {
    flow.record(agent::retrieval, agent::extractor, PayloadKind::raw_text);

    Stopwatch extract_watch;
    result.extracted = extract_claims(query, views, backend, prompts, options.extractor);
    result.timings.extract_ms = extract_watch.ms();

    std::vector<AuditedClaim> certified;
    if (options.mode == PipelineMode::no_auditor) {
        // Ablation: every extracted claim is certified by fiat.
        flow.record(agent::extractor, agent::gate, PayloadKind::claim_cards);
        for (const auto& card : result.extracted) {
            AuditedClaim a;
            a.card = card;
            a.support = 0.0;
            a.influence = 0.0;
            a.risk = 0.0;
            a.verdict = AuditVerdict::certified;
            result.audited.push_back(a);
        }
        certified = result.audited;
    } else {
        flow.record(agent::extractor, agent::auditor, PayloadKind::claim_cards);
        Stopwatch audit_watch;
        AuditResult audit;
        try {
            audit = audit_claims(result.extracted, options.audit, backend, prompts);
        } catch (const StageError&) {
            throw;
        } catch (const BackendError& e) {
            throw StageError("auditor", e.what(), true);
        } catch (const ProtocolError& e) {
            throw StageError("auditor", e.what(), true);
        } catch (const Error& e) {
            throw StageError("auditor", e.what());
        }
        result.timings.audit_ms = audit_watch.ms();
        result.audited = audit.claims;
        result.uniform_agreement = audit.uniform_agreement;
        AuditResult tmp;
        tmp.claims = result.audited;
        certified = certified_claims(tmp);
    }

    GateDecision decision;
    if (options.mode == PipelineMode::no_gate) {
        flow.record(agent::auditor, agent::synthesizer, PayloadKind::audited_claims);
        decision = {GateState::answerable, "gate ablated"};
        result.gate.reset();
    } else {
        if (options.mode == PipelineMode::full) {
            flow.record(agent::auditor, agent::gate, PayloadKind::audited_claims);
        }
        Stopwatch gate_watch;
        decision = gate_decide(query, certified, backend, prompts, options.audit.normalizer,
                               options.audit.relations);
        result.timings.gate_ms = gate_watch.ms();
        result.gate = decision;
        flow.record(agent::gate, agent::synthesizer, PayloadKind::gate_decision);
    }

    std::vector<AuditedClaim> approved;
    if (decision.state == GateState::answerable) approved = certified;
    for (const auto& a : approved) result.approved_claim_ids.push_back(a.card.claim_id);

    Stopwatch synth_watch;
    result.answer = synthesize(query, decision, approved, backend, prompts, options.seed);
    result.timings.synthesize_ms = synth_watch.ms();
    flow.record(agent::synthesizer, agent::user, PayloadKind::answer);
}

}  // namespace

QueryResult run_query(const Query& query, const RetrievalSet& retrieval,
                      const PipelineOptions& options, Backend& backend,
                      const PromptSet& prompts) {
    QueryResult result;
    result.query_id = query.query_id;
    result.mode = options.mode;
    FlowRecorder flow{result.flow, result.query_id};

    // Agents receive provenance-free projections only.
    std::vector<DocView> views;
    views.reserve(retrieval.docs.size());
    for (const auto& doc : retrieval.docs) views.push_back(to_view(doc));

    if (options.sabotage == SabotageMode::leak_raw_text_to_synthesizer) {
        flow.record(agent::retrieval, agent::synthesizer, PayloadKind::raw_text);
    }

    CountingBackend counting(backend);
    Stopwatch total_watch;
    try {
        if (is_cordoned(options.mode)) {
            run_cordoned(query, views, options, counting, prompts, result, flow);
        } else {
            run_baseline(query, views, options, counting, prompts, result, flow);
        }
    } catch (const StageError& e) {
        result.error = e.what();
        result.backend_failure = e.backend_failure();
    } catch (const BackendError& e) {
        result.error = std::string("pipeline: ") + e.what();
        result.backend_failure = true;
    } catch (const ProtocolError& e) {
        result.error = std::string("pipeline: ") + e.what();
        result.backend_failure = true;
    } catch (const Error& e) {
        result.error = std::string("pipeline: ") + e.what();
    }
    result.timings.total_ms = total_watch.ms();
    result.chat_calls = counting.chat_calls();
    result.embed_calls = counting.embed_calls();
    return result;
}

std::vector<std::string> check_invariants(const QueryResult& result) {
    std::vector<std::string> violations;
    if (!is_cordoned(result.mode)) return violations;

    static const std::set<std::string> kShielded = {agent::auditor, agent::gate,
                                                    agent::synthesizer};
    for (const auto& ev : result.flow) {
        if (ev.payload_kind == PayloadKind::raw_text && kShielded.count(ev.receiver)) {
            violations.push_back("I1: raw_text delivered to " + ev.receiver + " (seq " +
                                 std::to_string(ev.seq) + ")");
        }
        if (ev.sender != agent::retrieval && ev.payload_kind == PayloadKind::raw_text) {
            violations.push_back("I2: post-extraction hand-off from " + ev.sender + " to " +
                                 ev.receiver + " carries raw_text");
        }
    }

    if (result.mode == PipelineMode::full && !result.answer.cited_claim_ids.empty()) {
        std::set<std::string> extracted, certified;
        for (const auto& c : result.extracted) extracted.insert(c.claim_id);
        for (const auto& a : result.audited) {
            if (a.verdict == AuditVerdict::certified) certified.insert(a.card.claim_id);
        }
        const std::set<std::string> approved(result.approved_claim_ids.begin(),
                                             result.approved_claim_ids.end());
        const bool gate_answerable =
            result.gate.has_value() && result.gate->state == GateState::answerable;
        for (const auto& id : result.answer.cited_claim_ids) {
            if (!extracted.count(id)) {
                violations.push_back("I3: cited claim was never extracted: " + id);
            } else if (!certified.count(id)) {
                violations.push_back("I3: cited claim was not certified: " + id);
            } else if (!gate_answerable || !approved.count(id)) {
                violations.push_back("I3: cited claim was not gate-approved: " + id);
            }
        }
    }
    return violations;
}

}  // namespace cordon
