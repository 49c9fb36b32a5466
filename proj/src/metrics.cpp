#include "gsn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gsn {

namespace {

void require_shared_dims_n(std::span<const NormalizedMap> maps, size_t min_count, const char* who) {
    if (maps.size() < min_count)
        throw FewerThanTwoMaps(std::string(who) + ": need at least " + std::to_string(min_count) + " maps");
    for (const auto& m : maps)
        if (!m.same_dims(maps[0])) throw DimMismatch(std::string(who) + ": maps disagree on dims");
}

double pair_iou(const NormalizedMap& a, const NormalizedMap& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.p.size(); ++k) {
        const double denom = a.p[k] + b.p[k];
        if (denom > 0.0) s += a.p[k] * b.p[k] / denom;
    }
    return s;
}

double pair_sym_kl(const NormalizedMap& a, const NormalizedMap& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.p.size(); ++k) {
        const double p = a.p[k];
        const double q = b.p[k];
        if (p <= 0.0 || q <= 0.0) throw NonPositiveEntry("sym_kl: nonpositive entry; enable eps flooring");
        s += p * std::log(p / q) + q * std::log(q / p);
    }
    return 0.5 * s;
}

}  // namespace

double intensity(std::span<const AttentionMap> maps) {
    if (maps.empty()) throw DimMismatch("intensity: need at least one map");
    for (const auto& m : maps)
        if (!m.same_dims(maps[0])) throw DimMismatch("intensity: maps disagree on dims");
    double best = HUGE_VAL;
    for (const auto& m : maps) {
        const double mean = std::accumulate(m.v.begin(), m.v.end(), 0.0) / m.cells();
        best = std::min(best, mean);
    }
    return best;
}

double variance(std::span<const NormalizedMap> maps) {
    if (maps.empty()) throw DimMismatch("variance: need at least one map");
    for (const auto& m : maps)
        if (!m.same_dims(maps[0])) throw DimMismatch("variance: maps disagree on dims");
    double total = 0.0;
    for (const auto& m : maps) {
        const Point2D c = center_of_mass(m);
        double var = 0.0;
        for (int i = 0; i < m.h; ++i)
            for (int j = 0; j < m.w; ++j) {
                const double dr = c.row - i;
                const double dc = c.col - j;
                var += m.at(i, j) * (dr * dr + dc * dc);
            }
        total += var;
    }
    return total / static_cast<double>(maps.size());
}

double iou(std::span<const NormalizedMap> maps) {
    require_shared_dims_n(maps, 2, "iou");
    double s = 0.0;
    int pairs = 0;
    for (size_t a = 0; a < maps.size(); ++a)
        for (size_t b = a + 1; b < maps.size(); ++b) {
            s += pair_iou(maps[a], maps[b]);
            ++pairs;
        }
    return s / pairs;
}

std::vector<int> polygon_order(const std::vector<Point2D>& vertices) {
    Point2D centroid;
    for (const auto& v : vertices) {
        centroid.row += v.row;
        centroid.col += v.col;
    }
    centroid.row /= static_cast<double>(vertices.size());
    centroid.col /= static_cast<double>(vertices.size());

    std::vector<int> order(vertices.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ara = vertices[a].row - centroid.row, aca = vertices[a].col - centroid.col;
        const double arb = vertices[b].row - centroid.row, acb = vertices[b].col - centroid.col;
        const double ta = std::atan2(aca, ara);
        const double tb = std::atan2(acb, arb);
        if (ta != tb) return ta < tb;
        const double ra = ara * ara + aca * aca;
        const double rb = arb * arb + acb * acb;
        if (ra != rb) return ra < rb;
        return a < b;
    });
    return order;
}

double polygon_area(std::vector<Point2D> vertices) {
    const auto order = polygon_order(vertices);
    const size_t n = vertices.size();
    double signed2 = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const Point2D& a = vertices[order[k]];
        const Point2D& b = vertices[order[(k + 1) % n]];
        signed2 += a.row * b.col - b.row * a.col;
    }
    return 0.5 * std::abs(signed2);
}

double com_distance(std::span<const NormalizedMap> maps) {
    require_shared_dims_n(maps, 2, "com_distance");
    std::vector<Point2D> coms;
    coms.reserve(maps.size());
    for (const auto& m : maps) coms.push_back(center_of_mass(m));
    if (maps.size() == 2) {
        const double dr = coms[0].row - coms[1].row;
        const double dc = coms[0].col - coms[1].col;
        return dr * dr + dc * dc;
    }
    return polygon_area(std::move(coms));
}

double sym_kl(std::span<const NormalizedMap> maps) {
    require_shared_dims_n(maps, 2, "sym_kl");
    double s = 0.0;
    int pairs = 0;
    for (size_t a = 0; a < maps.size(); ++a)
        for (size_t b = a + 1; b < maps.size(); ++b) {
            s += pair_sym_kl(maps[a], maps[b]);
            ++pairs;
        }
    return s / pairs;
}

double cc(std::span<const NormalizedMap> maps) {
    require_shared_dims_n(maps, 2, "cc");
    double s = 0.0;
    for (size_t k = 0; k < maps[0].p.size(); ++k) {
        double best = maps[0].p[k];
        for (size_t m = 1; m < maps.size(); ++m) best = std::max(best, maps[m].p[k]);
        s += best;
    }
    return s / maps[0].cells();
}

MetricRecord compute_metrics(const AttentionStack& stack, const std::vector<int>& entities, double eps_floor) {
    if (entities.size() < 2) throw FewerThanTwoEntities("compute_metrics: need at least two entities");
    std::vector<AttentionMap> raw;
    std::vector<NormalizedMap> norm;
    raw.reserve(entities.size());
    norm.reserve(entities.size());
    for (int e : entities) {
        if (e < 0 || e >= stack.n) throw OutOfRange("compute_metrics: entity index out of range");
        raw.push_back(stack.slice(e));
        norm.push_back(normalize_map(raw.back(), eps_floor));
    }
    MetricRecord r;
    r.intensity = intensity(raw);
    r.variance = variance(norm);
    r.iou = iou(norm);
    r.com_distance = com_distance(norm);
    r.sym_kl = sym_kl(norm);
    r.cc = cc(norm);
    return r;
}

}  // namespace gsn
