#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsn/analysis.hpp"
#include "gsn/trial.hpp"

namespace gsn {

// Runs the config's seed range and returns the records sorted by seed.
// Trials are independent; `threads` only sets the fan-out and never affects
// the results. `nurse` overrides cfg.nurse when provided (use std::nullopt
// to force a plain run).
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg, const std::optional<NurseConfig>& nurse,
                                    int threads);

struct ExperimentResult {
    int trials = 0;
    int successes = 0;
    double success_rate = 0.0;
};

// run_trials plus the on-disk layout: <out>/trial_<seed>/{metrics.csv,
// final.atnm, summary.json}.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads);

// Reads every trial_* directory under `out_dir` (sorted by seed), writes
// <out_dir>/analysis/{summaries.csv, corr.csv, corr.svg} and returns the
// matrix.
CorrMatrix analyze_output_dir(const std::string& out_dir, Aggregate agg);

}  // namespace gsn
