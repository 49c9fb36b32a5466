#include "gsn/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace gsn {

NoiseSchedule build_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 1) throw BadRange("build_schedule: need steps >= 1");
    if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
        throw BadRange("build_schedule: need 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.steps = steps;
    s.alpha.resize(steps);
    s.alpha_bar.resize(steps);
    s.sigma.resize(steps);
    double running = 1.0;
    for (int i = 0; i < steps; ++i) {
        const double beta =
            steps == 1 ? beta_start : beta_start + (beta_end - beta_start) * i / static_cast<double>(steps - 1);
        s.alpha[i] = 1.0 - beta;
        running *= s.alpha[i];
        s.alpha_bar[i] = running;
        s.sigma[i] = std::sqrt(beta);
    }
    return s;
}

LatentGrid forward_diffuse(const LatentGrid& z0, int t, const NoiseSchedule& sched, const LatentGrid& noise) {
    if (!z0.same_dims(noise)) throw DimMismatch("forward_diffuse: noise dims differ from z0");
    const double abar = sched.alpha_bar_at(t);
    const double a = std::sqrt(abar);
    const double b = std::sqrt(1.0 - abar);
    LatentGrid out = z0;
    for (size_t k = 0; k < out.v.size(); ++k) out.v[k] = a * z0.v[k] + b * noise.v[k];
    return out;
}

ToyDenoiser make_toy_denoiser(TokenEmbeddings tok, double g0, const NoiseSchedule& sched) {
    if (g0 < 0.0) throw ValidationError("make_toy_denoiser: pull amplitude must be >= 0");
    ToyDenoiser den;
    den.tok = std::move(tok);
    den.pull = [g0, abar = sched.alpha_bar](int t) {
        if (t < 1 || t > static_cast<int>(abar.size())) throw OutOfRange("ToyDenoiser: step out of range");
        return g0 * std::sqrt(1.0 - abar[t - 1]);
    };
    return den;
}

LatentGrid denoiser_predict(const LatentGrid& z, int t, const ToyDenoiser& den) {
    if (z.d != den.tok.d) throw DimMismatch("denoiser_predict: latent depth != token dimension");
    const double g = den.pull(t);
    const AttentionStack a = compute_attention(z, den.tok);
    LatentGrid eps = z;
    for (int i = 0; i < z.h; ++i)
        for (int j = 0; j < z.w; ++j)
            for (int tokid = 0; tokid < den.tok.n; ++tokid) {
                const double w = g * a.at(i, j, tokid);
                const double* value = den.tok.values.data() + static_cast<size_t>(tokid) * den.tok.d;
                for (int c = 0; c < z.d; ++c) eps.at(i, j, c) -= w * value[c];
            }
    return eps;
}

LatentGrid reverse_step(const LatentGrid& z, int t, const NoiseSchedule& sched, const ToyDenoiser& den,
                        const LatentGrid& noise) {
    if (!z.same_dims(noise)) throw DimMismatch("reverse_step: noise dims differ from z");
    const double alpha = sched.alpha_at(t);
    const double abar = sched.alpha_bar_at(t);
    if (abar == 1.0) throw DegenerateSchedule("reverse_step: alpha_bar == 1 at step " + std::to_string(t));
    const double eps_coef = (1.0 - alpha) / std::sqrt(1.0 - abar);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    const double sigma = t == 1 ? 0.0 : sched.sigma_at(t);

    const LatentGrid eps_hat = denoiser_predict(z, t, den);
    LatentGrid out = z;
    for (size_t k = 0; k < out.v.size(); ++k)
        out.v[k] = inv_sqrt_alpha * (z.v[k] - eps_coef * eps_hat.v[k]) + sigma * noise.v[k];
    return out;
}

std::vector<bool> formation_success(const AttentionStack& final_stack, const std::vector<int>& entities,
                                    double s_min, double tau) {
    if (!(s_min > 0.0) || !(s_min <= 1.0)) throw BadRange("formation_success: s_min must be in (0, 1]");
    if (!(tau > 0.0) || !(tau < 1.0)) throw BadRange("formation_success: tau must be in (0, 1)");

    const int h = final_stack.h, w = final_stack.w;
    // Argmax token per cell, ties to the lowest token index.
    std::vector<int> owner(static_cast<size_t>(h) * w, 0);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            int best_tok = 0;
            double best = final_stack.at(i, j, 0);
            for (int t = 1; t < final_stack.n; ++t)
                if (final_stack.at(i, j, t) > best) {
                    best = final_stack.at(i, j, t);
                    best_tok = t;
                }
            owner[static_cast<size_t>(i) * w + j] = best_tok;
        }

    const int min_cells = static_cast<int>(std::ceil(s_min * h * w));
    std::vector<bool> formed;
    formed.reserve(entities.size());
    for (int e : entities) {
        if (e < 0 || e >= final_stack.n) throw OutOfRange("formation_success: entity index out of range");
        std::vector<char> seen(static_cast<size_t>(h) * w, 0);
        bool ok = false;
        for (int start = 0; start < h * w && !ok; ++start) {
            if (seen[start] || owner[start] != e) continue;
            // Flood-fill this component, tracking size and attention mass.
            std::queue<int> frontier;
            frontier.push(start);
            seen[start] = 1;
            int size = 0;
            double mass = 0.0;
            while (!frontier.empty()) {
                const int cell = frontier.front();
                frontier.pop();
                const int i = cell / w, j = cell % w;
                ++size;
                mass += final_stack.at(i, j, e);
                const int neighbors[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
                for (const auto& nb : neighbors) {
                    if (nb[0] < 0 || nb[0] >= h || nb[1] < 0 || nb[1] >= w) continue;
                    const int k = nb[0] * w + nb[1];
                    if (!seen[k] && owner[k] == e) {
                        seen[k] = 1;
                        frontier.push(k);
                    }
                }
            }
            if (size >= min_cells && mass / size >= tau) ok = true;
        }
        formed.push_back(ok);
    }
    return formed;
}

}  // namespace gsn
