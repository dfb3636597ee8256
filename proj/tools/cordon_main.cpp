#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cordon/attack.hpp"
#include "cordon/errors.hpp"
#include "cordon/experiment.hpp"
#include "cordon/retrieval.hpp"

namespace {

using cordon::ExperimentOutcome;

std::string pct(const nlohmann::json& value) {
    if (value.is_null()) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << value.get<double>() * 100.0 << "%";
    return out.str();
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    cordon::ExperimentConfig config = cordon::load_config(config_path, overrides);
    ExperimentOutcome outcome = cordon::run_experiment(config);
    const auto& r = outcome.report;

    std::cout << "mode=" << r.mode << " queries=" << r.total_queries
              << " poisoned=" << r.poisoned_queries << " judged=" << r.judged;
    if (r.asr) {
        std::cout << " asr=" << std::fixed << std::setprecision(4) << *r.asr;
        if (r.asr_wilson) {
            std::cout << " wilson=[" << r.asr_wilson->low << "," << r.asr_wilson->high << "]";
        }
    }
    if (r.answerability_rate) {
        std::cout << " answerability=" << std::fixed << std::setprecision(4)
                  << *r.answerability_rate;
    }
    std::cout << " violations=" << r.invariant_violation_count
              << " backend_failures=" << r.backend_failures << "\n";
    std::cout << "report written to " << config.output_dir << "\n";

    if (r.invariant_violation_count > 0) {
        for (const auto& d : r.details) {
            for (const auto& v : d.invariant_violations) {
                std::cerr << "INVARIANT VIOLATION [" << d.query_id << "] " << v << "\n";
            }
        }
    }
    return outcome.exit_code;
}

int cmd_attack_gen(const std::string& strategy_name, int n, std::uint64_t seed,
                   const std::string& out_path, const std::string& queries_path,
                   const std::string& consensus, const std::string& venue) {
    const cordon::AttackStrategy strategy = cordon::attack_strategy_from_string(strategy_name);
    if (strategy == cordon::AttackStrategy::cached) {
        throw cordon::InputError("attack-gen generates caches; 'cached' only consumes them");
    }
    const auto queries = cordon::load_queries(queries_path);
    std::vector<cordon::PoisonCacheEntry> entries;
    for (const auto& q : queries) {
        if (!q.target_false_claim) continue;
        cordon::AttackSpec spec;
        spec.strategy = strategy;
        spec.num_docs = n;
        spec.target = *q.target_false_claim;
        spec.seed = seed ^ cordon::stable_hash(q.query_id);
        spec.validate();
        const auto docs = cordon::generate_poison(spec, q.target_triple, consensus, venue);
        cordon::PoisonCacheEntry entry;
        entry.query_id = q.query_id;
        entry.target_false_claim = *q.target_false_claim;
        for (const auto& d : docs) entry.docs.push_back(d.text);
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) {
        throw cordon::InputError("no queries with target_false_claim in " + queries_path);
    }
    cordon::write_poison_cache(out_path, entries);
    std::cout << "wrote " << entries.size() << " cache entries (" << n << " docs each) to "
              << out_path << "\n";
    return 0;
}

int cmd_report(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::pair<std::string, nlohmann::json>> runs;
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "metrics.json")) {
            subdirs.push_back(entry.path());
        }
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs) {
        std::ifstream in(sub / "metrics.json");
        nlohmann::json metrics;
        in >> metrics;
        runs.emplace_back(sub.filename().string(), std::move(metrics));
    }
    if (runs.empty()) {
        throw cordon::InputError("no run directories with metrics.json under " + dir);
    }

    std::ofstream asr_csv(fs::path(dir) / "asr_table.csv");
    asr_csv << "run,mode,judged,endorse,asr,wilson_low,wilson_high\n";
    std::ofstream cascade_csv(fs::path(dir) / "cascade_table.csv");
    cascade_csv << "run,mode,retrieved_poison_docs,extracted_poison_claims,"
                   "certified_poison_claims,extraction_yield,audit_reject_rate,gate_block_rate\n";

    auto cell = [](const nlohmann::json& v) -> std::string {
        if (v.is_null()) return "";
        std::ostringstream out;
        out << v;
        return out.str();
    };

    std::cout << std::left << std::setw(28) << "run" << std::setw(12) << "mode" << std::setw(8)
              << "judged" << std::setw(8) << "asr" << std::setw(10) << "audit_rej" << std::setw(10)
              << "gate_blk" << "\n";
    for (const auto& [name, m] : runs) {
        const auto& cascade = m.at("cascade");
        asr_csv << name << "," << m.value("mode", "") << "," << m.value("judged", 0L) << ","
                << m.value("endorse", 0L) << "," << cell(m.at("asr")) << ",";
        if (m.contains("asr_ci") && !m.at("asr_ci").is_null()) {
            asr_csv << m.at("asr_ci").at("low") << "," << m.at("asr_ci").at("high");
        } else {
            asr_csv << ",";
        }
        asr_csv << "\n";
        cascade_csv << name << "," << m.value("mode", "") << ","
                    << cell(cascade.at("retrieved_poison_docs")) << ","
                    << cell(cascade.at("extracted_poison_claims")) << ","
                    << cell(cascade.at("certified_poison_claims")) << ","
                    << cell(cascade.at("extraction_yield")) << ","
                    << cell(cascade.at("audit_reject_rate")) << ","
                    << cell(cascade.at("gate_block_rate")) << "\n";

        std::cout << std::left << std::setw(28) << name << std::setw(12) << m.value("mode", "")
                  << std::setw(8) << m.value("judged", 0L) << std::setw(8) << pct(m.at("asr"))
                  << std::setw(10) << pct(cascade.at("audit_reject_rate")) << std::setw(10)
                  << pct(cascade.at("gate_block_rate")) << "\n";
    }
    std::cout << "tables written to " << dir << "/asr_table.csv and cascade_table.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cordon: compartmentalized RAG defense experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run a configured experiment");
    run->add_option("--config", config_path, "Experiment config file (JSON)")->required();
    run->add_option("--set", overrides, "Override a config key, e.g. --set mode=vanilla");

    std::string strategy, gen_out, gen_queries;
    std::string consensus = "the earlier consensus held in the literature";
    std::string venue = "Journal of Applied Results";
    int gen_n = 5;
    std::uint64_t gen_seed = 42;
    auto* gen = app.add_subcommand("attack-gen", "Generate a poison cache file");
    gen->add_option("--strategy", strategy, "corruptrag_as|claim_mimicry|consistency_collusion|judge_confusion")
        ->required();
    gen->add_option("--n", gen_n, "Poison documents per query (default 5)");
    gen->add_option("--seed", gen_seed, "Generation seed");
    gen->add_option("--out", gen_out, "Output cache path")->required();
    gen->add_option("--queries", gen_queries, "Query file with target_false_claim fields")
        ->required();
    gen->add_option("--consensus", consensus, "CorruptRAG consensus slot");
    gen->add_option("--venue", venue, "CorruptRAG venue slot");

    std::string report_dir;
    auto* rep = app.add_subcommand("report", "Aggregate per-run reports into tables");
    rep->add_option("--dir", report_dir, "Directory holding run subdirectories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, overrides);
        if (gen->parsed())
            return cmd_attack_gen(strategy, gen_n, gen_seed, gen_out, gen_queries, consensus,
                                  venue);
        if (rep->parsed()) return cmd_report(report_dir);
    } catch (const cordon::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 2;
    } catch (const cordon::ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 2;
    } catch (const cordon::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
