#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsn/losses.hpp"

namespace gsn {

// Analytic-vs-central-difference verification over random inputs: map
// gradients on random softmax stacks and latent gradients through the
// attention chain.
struct GradCheckOptions {
    int seeds = 50;
    int stack_h = 8, stack_w = 8, stack_n = 2;   // map-gradient stage
    int latent_h = 6, latent_w = 6, latent_d = 4, latent_n = 4;  // latent stage
    double step = 1e-6;         // central-difference h, map stage
    double latent_step = 1e-5;  // larger h for the composed latent objective,
                                // whose larger magnitude raises the rounding
                                // floor of the difference quotient
    double rel_tol = 1e-4;   // relative threshold for |analytic| >= abs_floor
    double abs_floor = 1e-8; // below this magnitude, compare absolutely
};

struct GradCheckIssue {
    std::string kind;
    uint64_t seed = 0;
    std::string stage;  // "maps" or "latent"
    size_t coordinate = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double error = 0.0;
};

struct GradCheckReport {
    long comparisons = 0;
    double worst_rel = 0.0;
    std::vector<GradCheckIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Every parseable loss family: the seven bases plus each overlap base
// combined with both auxiliary terms.
std::vector<LossKind> canonical_loss_kinds();

GradCheckReport run_gradient_suite(const std::vector<LossKind>& kinds, const GradCheckOptions& opt = {});

// Random per-cell softmax stack used by the suite and by tests.
AttentionStack random_softmax_stack(int h, int w, int n, uint64_t seed);

}  // namespace gsn
