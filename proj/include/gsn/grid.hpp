#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "gsn/errors.hpp"

namespace gsn {

// Shared extents of every grid in one experiment: cell rows, cell columns,
// entity-token count.
struct GridDims {
    int h = 0;
    int w = 0;
    int n = 0;

    bool operator==(const GridDims&) const = default;

    void validate() const {
        if (h < 1 || w < 1 || n < 1)
            throw ValidationError("GridDims: h, w, n must all be >= 1");
    }
};

// H x W grid of nonnegative attention scores for a single token.
struct AttentionMap {
    int h = 0;
    int w = 0;
    std::vector<double> v;  // row-major

    AttentionMap() = default;
    AttentionMap(int h_, int w_, double fill = 0.0) : h(h_), w(w_), v(static_cast<size_t>(h_) * w_, fill) {}

    double& at(int i, int j) { return v[static_cast<size_t>(i) * w + j]; }
    double at(int i, int j) const { return v[static_cast<size_t>(i) * w + j]; }
    int cells() const { return h * w; }
    bool same_dims(const AttentionMap& o) const { return h == o.h && w == o.w; }
};

// H x W probability grid over spatial cells; entries sum to 1.
// Produced by normalize_map; tests may build one directly when the
// invariant is known to hold by construction.
struct NormalizedMap {
    int h = 0;
    int w = 0;
    std::vector<double> p;  // row-major

    NormalizedMap() = default;
    NormalizedMap(int h_, int w_, double fill = 0.0) : h(h_), w(w_), p(static_cast<size_t>(h_) * w_, fill) {}

    double& at(int i, int j) { return p[static_cast<size_t>(i) * w + j]; }
    double at(int i, int j) const { return p[static_cast<size_t>(i) * w + j]; }
    int cells() const { return h * w; }
    bool same_dims(const NormalizedMap& o) const { return h == o.h && w == o.w; }
};

// Spatial coordinate in cell units, (row, col), origin at cell (0, 0).
struct Point2D {
    double row = 0.0;
    double col = 0.0;
};

// H x W x N per-token attention scores; token index varies fastest, which is
// also the ATNM v1 on-disk order.
struct AttentionStack {
    int h = 0;
    int w = 0;
    int n = 0;
    std::vector<double> v;

    AttentionStack() = default;
    AttentionStack(int h_, int w_, int n_, double fill = 0.0)
        : h(h_), w(w_), n(n_), v(static_cast<size_t>(h_) * w_ * n_, fill) {}

    double& at(int i, int j, int tok) { return v[(static_cast<size_t>(i) * w + j) * n + tok]; }
    double at(int i, int j, int tok) const { return v[(static_cast<size_t>(i) * w + j) * n + tok]; }
    int cells() const { return h * w; }
    GridDims dims() const { return GridDims{h, w, n}; }

    // Copy of one token's H x W map.
    AttentionMap slice(int tok) const {
        AttentionMap m(h, w);
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) m.at(i, j) = at(i, j, tok);
        return m;
    }
};

// H x W x D real-valued latent field; channel index varies fastest.
struct LatentGrid {
    int h = 0;
    int w = 0;
    int d = 0;
    std::vector<double> v;

    LatentGrid() = default;
    LatentGrid(int h_, int w_, int d_, double fill = 0.0)
        : h(h_), w(w_), d(d_), v(static_cast<size_t>(h_) * w_ * d_, fill) {}

    double& at(int i, int j, int c) { return v[(static_cast<size_t>(i) * w + j) * d + c]; }
    double at(int i, int j, int c) const { return v[(static_cast<size_t>(i) * w + j) * d + c]; }
    size_t size() const { return v.size(); }
    bool same_dims(const LatentGrid& o) const { return h == o.h && w == o.w && d == o.d; }
};

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace gsn
