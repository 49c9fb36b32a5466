#pragma once

#include "gsn/grid.hpp"
#include "gsn/losses.hpp"

namespace gsn {

// Latent-update schedule: at the first `cutoff` denoising steps, apply
// `inner_steps` gradient updates with a linearly decaying learning rate.
struct NurseConfig {
    LossKind loss;
    double lr0 = 20.0;    // initial learning rate
    int cutoff = 25;      // nursing applied at denoising steps k < cutoff
    int inner_steps = 1;  // gradient updates per denoising step
    bool backtrack = true;  // halve the step until the loss decreases

    void validate() const {
        if (!(lr0 >= 0.0)) throw ValidationError("nurse.lr0 must be >= 0");
        if (cutoff < 0) throw ValidationError("nurse.cutoff must be >= 0");
        if (inner_steps < 1) throw ValidationError("nurse.inner_steps must be >= 1");
    }
};

// lr0 * (1 - k / cutoff): linear decay reaching 0 at k == cutoff.
// Throws OutOfRange unless 0 <= k < cutoff.
double lr_at(const NurseConfig& cfg, int k);

// One gradient update z - alpha * grad_latent(cfg.loss, ...). A non-finite
// gradient aborts with NonFiniteGradient rather than being clipped.
LatentGrid nurse_step(const LatentGrid& z, const NurseConfig& cfg, const TokenEmbeddings& tok,
                      const std::vector<int>& entities, double alpha);

// nurse_step with the descent-halving rule: starting from `alpha`, the step
// is halved (at most 20 times) until the loss strictly decreases; if no such
// step exists the latent is returned unchanged.
LatentGrid nurse_step_backtracked(const LatentGrid& z, const NurseConfig& cfg, const TokenEmbeddings& tok,
                                  const std::vector<int>& entities, double alpha);

// Trial-loop hook: applies the configured updates for denoising step k.
// A no-op when k >= cutoff or the effective rate is 0.
LatentGrid apply_nursing(LatentGrid z, const NurseConfig& cfg, const TokenEmbeddings& tok,
                         const std::vector<int>& entities, int k);

}  // namespace gsn
