#include "gsn/nursing.hpp"

#include <cmath>

namespace gsn {

double lr_at(const NurseConfig& cfg, int k) {
    if (k < 0 || k >= cfg.cutoff) throw OutOfRange("lr_at: step index outside [0, cutoff)");
    return cfg.lr0 * (1.0 - static_cast<double>(k) / cfg.cutoff);
}

LatentGrid nurse_step(const LatentGrid& z, const NurseConfig& cfg, const TokenEmbeddings& tok,
                      const std::vector<int>& entities, double alpha) {
    if (!(alpha >= 0.0)) throw ValidationError("nurse_step: alpha must be >= 0");
    if (alpha == 0.0) return z;
    const LatentGrid g = grad_latent(cfg.loss, z, tok, entities);
    if (!all_finite(g.v)) throw NonFiniteGradient("nurse_step: non-finite gradient");
    LatentGrid out = z;
    for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = z.v[k] - alpha * g.v[k];
    return out;
}

LatentGrid nurse_step_backtracked(const LatentGrid& z, const NurseConfig& cfg, const TokenEmbeddings& tok,
                                  const std::vector<int>& entities, double alpha) {
    if (!(alpha >= 0.0)) throw ValidationError("nurse_step: alpha must be >= 0");
    if (alpha == 0.0) return z;
    const LatentGrid g = grad_latent(cfg.loss, z, tok, entities);
    if (!all_finite(g.v)) throw NonFiniteGradient("nurse_step: non-finite gradient");

    const double before = loss_eval(cfg.loss, compute_attention(z, tok), entities);
    for (int halving = 0; halving <= 20; ++halving, alpha *= 0.5) {
        LatentGrid trial = z;
        for (size_t k = 0; k < trial.v.size(); ++k) trial.v[k] = z.v[k] - alpha * g.v[k];
        if (loss_eval(cfg.loss, compute_attention(trial, tok), entities) < before) return trial;
    }
    return z;  // no descending step found (gradient effectively zero)
}

LatentGrid apply_nursing(LatentGrid z, const NurseConfig& cfg, const TokenEmbeddings& tok,
                         const std::vector<int>& entities, int k) {
    if (k < 0 || k >= cfg.cutoff || cfg.lr0 == 0.0) return z;
    const double alpha = lr_at(cfg, k);
    if (alpha == 0.0) return z;
    for (int step = 0; step < cfg.inner_steps; ++step)
        z = cfg.backtrack ? nurse_step_backtracked(z, cfg, tok, entities, alpha)
                          : nurse_step(z, cfg, tok, entities, alpha);
    return z;
}

}  // namespace gsn
