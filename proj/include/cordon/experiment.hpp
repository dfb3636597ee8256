#pragma once

#include <vector>

#include "cordon/config.hpp"
#include "cordon/eval.hpp"
#include "cordon/pipeline.hpp"

namespace cordon {

struct ExperimentOutcome {
    ExperimentReport report;
    std::vector<QueryResult> results;
    PoisonGroundTruth ground_truth;
    // 0 success; 2 backend failures occurred; 3 invariant violation
    // (3 wins over 2).
    int exit_code = 0;
};

/// Runs the configured experiment end to end: load corpus and queries,
/// retrieve, inject poison, run the pipeline per query (up to
/// config.concurrency at once), judge, aggregate, and write the report
/// files into config.output_dir.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// The same, but with the report emission left to the caller.
ExperimentOutcome run_experiment_in_memory(const ExperimentConfig& config);

}  // namespace cordon
