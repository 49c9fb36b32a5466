#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsn/config.hpp"
#include "gsn/diffusion.hpp"
#include "gsn/metrics.hpp"

namespace gsn {

// One denoising run: the per-step metric trajectory plus the final
// attention state and formation outcome.
struct TrialRecord {
    uint64_t seed = 0;
    std::vector<MetricRecord> metrics;  // row k = denoising step k (k = T - t)
    AttentionStack final_stack;
    std::vector<bool> formed;  // per entity
    bool success = false;      // all entities formed
};

// Runs one seeded trial: z_T ~ N(0, I) from the portable PRNG, then for
// t = T..1 an optional nursing update followed by a reverse step, recording
// metrics at every denoising step. `nurse` overrides cfg.nurse; pass
// cfg.nurse through for config-driven behavior.
TrialRecord run_trial(const ExperimentConfig& cfg, uint64_t seed, const std::optional<NurseConfig>& nurse);

// Token embeddings shared by every trial of an experiment.
TokenEmbeddings experiment_tokens(const ExperimentConfig& cfg);

}  // namespace gsn
