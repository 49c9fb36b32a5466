#pragma once

#include <functional>
#include <vector>

#include "gsn/attention.hpp"
#include "gsn/grid.hpp"

namespace gsn {

// Linear-beta noise schedule. Steps are 1-based: step t in [1, T] reads
// index t-1 of the per-step arrays.
struct NoiseSchedule {
    int steps = 0;
    std::vector<double> alpha;      // 1 - beta_t
    std::vector<double> alpha_bar;  // running product of alpha
    std::vector<double> sigma;      // sqrt(beta_t)

    double alpha_at(int t) const { return alpha[check(t)]; }
    double alpha_bar_at(int t) const { return alpha_bar[check(t)]; }
    double sigma_at(int t) const { return sigma[check(t)]; }

  private:
    int check(int t) const {
        if (t < 1 || t > steps) throw OutOfRange("NoiseSchedule: step out of range");
        return t - 1;
    }
};

// Betas linearly spaced over [beta_start, beta_end]; T == 1 uses beta_start.
// Throws BadRange unless T >= 1 and 0 < beta_start <= beta_end < 1.
NoiseSchedule build_schedule(int steps, double beta_start, double beta_end);

// sqrt(abar_t) * z0 + sqrt(1 - abar_t) * noise.
LatentGrid forward_diffuse(const LatentGrid& z0, int t, const NoiseSchedule& sched, const LatentGrid& noise);

// Analytic denoiser: at every cell the latent is pulled toward the value
// vectors of the tokens attending there,
//   eps_hat = z - g(t) * sum_n A[.,.,n] (x) value_n,
// so tokens compete for cells through the attention softmax.
struct ToyDenoiser {
    TokenEmbeddings tok;
    std::function<double(int)> pull;  // g(t) >= 0
};

// g(t) = g0 * sqrt(1 - abar_t): the pull fades as the latent clears up.
ToyDenoiser make_toy_denoiser(TokenEmbeddings tok, double g0, const NoiseSchedule& sched);

LatentGrid denoiser_predict(const LatentGrid& z, int t, const ToyDenoiser& den);

// One reverse update,
//   z_{t-1} = (z - (1-alpha_t)/sqrt(1-abar_t) * eps_hat) / sqrt(alpha_t) + sigma_t * noise,
// with the noise term suppressed at t == 1 so the endpoint is deterministic.
// Throws DegenerateSchedule when abar_t == 1 exactly.
LatentGrid reverse_step(const LatentGrid& z, int t, const NoiseSchedule& sched, const ToyDenoiser& den,
                        const LatentGrid& noise);

// An entity counts as formed when some 4-connected component of cells where
// it is the argmax token has at least ceil(s_min * H * W) cells and mean raw
// attention >= tau over the component.
std::vector<bool> formation_success(const AttentionStack& final_stack, const std::vector<int>& entities,
                                    double s_min, double tau);

}  // namespace gsn
