#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "gsn/trial.hpp"

namespace gsn {

// Per-trial scalar aggregate of the metric trajectory plus the outcome.
struct TrajectorySummary {
    uint64_t seed = 0;
    double intensity = 0.0;
    double variance = 0.0;
    double iou = 0.0;
    double com_distance = 0.0;
    double sym_kl = 0.0;
    double cc = 0.0;
    int success = 0;
};

enum class Aggregate { Mean, Final, Min, Max };

Aggregate parse_aggregate(const std::string& name);  // "mean" | "final" | "min" | "max"

// Aggregates each metric across the recorded steps (mean by default) and
// copies the outcome. Throws EmptyTrajectory on a record with no steps.
TrajectorySummary summarize_trajectory(const TrialRecord& rec, Aggregate agg = Aggregate::Mean);

// Sample Pearson correlation. Requires equal lengths >= 3 and nonzero
// variance on both sides (DegenerateVariance otherwise).
double pearson(std::span<const double> x, std::span<const double> y);

// Symmetric correlation matrix over the six metrics plus success.
struct CorrMatrix {
    static constexpr int kDim = 7;
    static const std::array<const char*, kDim>& labels();
    std::array<double, kDim * kDim> r{};

    double at(int a, int b) const { return r[a * kDim + b]; }
    double& at(int a, int b) { return r[a * kDim + b]; }
};

CorrMatrix correlation_matrix(std::span<const TrajectorySummary> summaries);

// CSV codecs for the analysis outputs.
std::string summaries_csv(std::span<const TrajectorySummary> summaries);
std::vector<TrajectorySummary> parse_summaries_csv(const std::string& text);
std::string corr_csv(const CorrMatrix& m);
CorrMatrix parse_corr_csv(const std::string& text);

}  // namespace gsn
