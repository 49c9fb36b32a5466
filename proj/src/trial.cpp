#include "gsn/trial.hpp"

#include <numeric>

#include "gsn/rng.hpp"

namespace gsn {

TokenEmbeddings experiment_tokens(const ExperimentConfig& cfg) {
    return TokenEmbeddings::random(cfg.entities, cfg.d, cfg.token_seed);
}

TrialRecord run_trial(const ExperimentConfig& cfg, uint64_t seed, const std::optional<NurseConfig>& nurse) {
    const NoiseSchedule sched = build_schedule(cfg.steps, cfg.beta_start, cfg.beta_end);
    const TokenEmbeddings tok = experiment_tokens(cfg);
    const ToyDenoiser den = make_toy_denoiser(tok, cfg.pull, sched);
    std::vector<int> entities(cfg.entities);
    std::iota(entities.begin(), entities.end(), 0);

    Xoshiro256 rng(seed);
    LatentGrid z(cfg.h, cfg.w, cfg.d);
    rng.fill_gaussian(z.v);

    TrialRecord rec;
    rec.seed = seed;
    rec.metrics.reserve(cfg.steps);

    LatentGrid noise(cfg.h, cfg.w, cfg.d);  // reused; zeroed at the final step
    for (int t = cfg.steps; t >= 1; --t) {
        const int k = cfg.steps - t;  // denoising step index
        if (nurse) z = apply_nursing(std::move(z), *nurse, tok, entities, k);
        rec.metrics.push_back(compute_metrics(compute_attention(z, tok), entities));
        if (t > 1)
            rng.fill_gaussian(noise.v);
        else
            std::fill(noise.v.begin(), noise.v.end(), 0.0);
        z = reverse_step(z, t, sched, den, noise);
    }

    rec.final_stack = compute_attention(z, tok);
    rec.formed = formation_success(rec.final_stack, entities, cfg.s_min, cfg.tau);
    rec.success = std::all_of(rec.formed.begin(), rec.formed.end(), [](bool b) { return b; });
    return rec;
}

}  // namespace gsn
