#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsn/attention.hpp"
#include "gsn/grid.hpp"

namespace gsn {

// Overlap-based guidance objectives plus the three reference baselines.
// The Neg* kinds minimize the negated metric, i.e. they push the metric up.
enum class LossBase {
    IoU,           // mean pairwise soft IoU of normalized maps (minimized)
    NegCoM,        // negated CoM distance / CoM polygon area
    NegKL,         // negated mean pairwise symmetric KL
    NegCC,         // negated clustering compactness
    AttendExcite,  // max over entities of (1 - max cell attention)
    DivideBind,    // negated min over entities of total variation
    Predicated,    // -sum_e log(1 - prod_ij (1 - A_e[ij]))
};

enum class AuxTerm {
    None,
    NegIntensity,  // lambda * (-Int), Int = min over entities of mean raw attention
    Variance,      // lambda * Var, Var = mean over entities of CoM spread
};

struct LossKind {
    LossBase base = LossBase::IoU;
    AuxTerm aux = AuxTerm::None;
    double lambda = 0.0;

    bool is_overlap() const {
        return base == LossBase::IoU || base == LossBase::NegCoM || base == LossBase::NegKL ||
               base == LossBase::NegCC;
    }

    // Accepted forms: "iou", "com", "kl", "cc", "ae", "db", "pd", and
    // combined overlap losses "<base>+int:<lambda>" / "<base>+var:<lambda>"
    // with lambda a positive decimal literal. Throws ParseError.
    static LossKind parse(std::string_view text);
    std::string to_string() const;
};

// Per-entity dL/dA grids, aligned with the entity list passed in.
struct MapGradient {
    std::vector<int> entities;
    std::vector<AttentionMap> grads;
};

// Loss value for the listed entity tokens of a stack. Overlap kinds consume
// spatially normalized maps; the baselines and the intensity term consume
// the raw per-entity slices, as their formulas are written over A.
double loss_eval(const LossKind& kind, const AttentionStack& stack, const std::vector<int>& entities);

// Exact analytic dL/dA for each listed entity, including the spatial
// normalization Jacobian wherever the loss reads normalized maps.
MapGradient loss_grad_maps(const LossKind& kind, const AttentionStack& stack, const std::vector<int>& entities);

// dL/dz through the per-cell softmax of compute_attention composed with
// loss_grad_maps.
LatentGrid grad_latent(const LossKind& kind, const LatentGrid& z, const TokenEmbeddings& tok,
                       const std::vector<int>& entities);

// Central-difference gradient oracle: (f(x + h e_i) - f(x - h e_i)) / (2h)
// per coordinate. Independent of every analytic gradient path above.
std::vector<double> finite_diff(const std::function<double(const std::vector<double>&)>& f,
                                std::vector<double> x, double h);

}  // namespace gsn
