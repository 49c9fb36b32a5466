#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gsn/nursing.hpp"

namespace gsn {

struct SeedRange {
    uint64_t start = 0;
    int count = 100;
};

// Everything a trial batch needs; all randomness derives from the seeds
// below, so identical configs give identical output trees.
struct ExperimentConfig {
    int h = 16, w = 16, d = 8;  // latent grid extents
    int entities = 2;           // competing tokens, all treated as entities
    int steps = 50;             // denoising steps T
    SeedRange seeds;
    std::optional<NurseConfig> nurse;
    // Formation thresholds and pull amplitude are calibrated together so the
    // un-nursed success rate sits near 50% and both failure modes (mushy
    // attention and fragmented territory) occur.
    double s_min = 0.10;  // formation: minimum component fraction of the grid
    double tau = 0.57;    // formation: minimum mean attention over the component
    double beta_start = 1e-4;
    double beta_end = 0.02;
    double pull = 8.0;          // denoiser pull amplitude g0
    uint64_t token_seed = 0;    // token embedding draw, shared by all trials
    std::string out_dir = "out";
};

// Parses and validates a config document. Missing fields take the defaults
// above; unknown keys and type mismatches raise ParseError naming the field;
// a ValidationError lists every violated constraint at once.
ExperimentConfig parse_config(const std::string& json_text);

// Nurse block of the same document format: {"loss":"com","lr0":20.0,
// "cutoff":25,"inner_steps":1,"backtrack":true}.
std::string to_json(const ExperimentConfig& cfg);

}  // namespace gsn
