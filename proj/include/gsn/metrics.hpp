#pragma once

#include <span>
#include <vector>

#include "gsn/attention.hpp"
#include "gsn/grid.hpp"

namespace gsn {

// One row of the per-step metric trajectory.
struct MetricRecord {
    double intensity = 0.0;     // min over entities of mean raw attention
    double variance = 0.0;      // mean over entities of spread around CoM, cell^2
    double iou = 0.0;           // mean pairwise soft IoU, in [0, 0.5]
    double com_distance = 0.0;  // squared CoM distance (N=2) or CoM polygon area (N>=3)
    double sym_kl = 0.0;        // mean pairwise symmetric KL, >= 0
    double cc = 0.0;            // mean over cells of max entity probability, in [1/(HW), N/(HW)]
};

// Minimum over maps of the per-map mean raw attention score.
double intensity(std::span<const AttentionMap> maps);

// Mean over maps of sum_ij p[i,j] * ||CoM - (i,j)||^2.
double variance(std::span<const NormalizedMap> maps);

// Mean over unordered pairs of sum_ij P*Q / (P+Q), with 0/0 cells
// contributing 0.
double iou(std::span<const NormalizedMap> maps);

// Two maps: squared Euclidean distance between centers of mass. Three or
// more: shoelace area of the polygon whose vertices are the CoMs, ordered by
// angle about their centroid (ties broken by radius).
double com_distance(std::span<const NormalizedMap> maps);

// Mean over unordered pairs of (1/2) sum_ij [P ln(P/Q) + Q ln(Q/P)].
// Throws NonPositiveEntry when any entry is <= 0.
double sym_kl(std::span<const NormalizedMap> maps);

// (1/(HW)) sum_ij max over maps of p[i,j].
double cc(std::span<const NormalizedMap> maps);

// Shoelace area of the polygon with the given vertices after angular sort
// around their centroid. Collinear inputs give 0.
double polygon_area(std::vector<Point2D> vertices);

// Angular sort order used by com_distance and its gradient: indices into
// `vertices`, sorted by atan2 about the centroid, ties by squared radius.
std::vector<int> polygon_order(const std::vector<Point2D>& vertices);

// Full metric row for the listed entity tokens of a stack. Raw slices feed
// intensity; spatially normalized slices (with eps_floor) feed the rest.
MetricRecord compute_metrics(const AttentionStack& stack, const std::vector<int>& entities,
                             double eps_floor = kEpsFloor);

}  // namespace gsn
