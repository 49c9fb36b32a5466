#include "gsn/attention.hpp"

#include <algorithm>
#include <cmath>

#include "gsn/rng.hpp"

namespace gsn {

namespace {

double row_norm(const double* row, int d) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) s += row[c] * row[c];
    return std::sqrt(s);
}

}  // namespace

TokenEmbeddings TokenEmbeddings::from_rows(int n, int d, std::vector<double> keys, std::vector<double> values) {
    if (n < 1 || d < 1) throw ValidationError("TokenEmbeddings: n and d must be >= 1");
    if (keys.size() != static_cast<size_t>(n) * d || values.size() != static_cast<size_t>(n) * d)
        throw DimMismatch("TokenEmbeddings: key/value buffers must be n*d");
    for (int tok = 0; tok < n; ++tok) {
        double* row = keys.data() + static_cast<size_t>(tok) * d;
        const double norm = row_norm(row, d);
        if (norm == 0.0) throw ValidationError("TokenEmbeddings: zero key row " + std::to_string(tok));
        for (int c = 0; c < d; ++c) row[c] /= norm;
    }
    TokenEmbeddings tok;
    tok.n = n;
    tok.d = d;
    tok.keys = std::move(keys);
    tok.values = std::move(values);
    tok.scale = std::sqrt(static_cast<double>(d));
    return tok;
}

TokenEmbeddings TokenEmbeddings::random(int n, int d, uint64_t seed) {
    if (n < 1 || d < 1) throw ValidationError("TokenEmbeddings: n and d must be >= 1");
    Xoshiro256 rng(seed);
    std::vector<double> rows(static_cast<size_t>(n) * d);
    rng.fill_gaussian(rows);

    // Gram-Schmidt when each token can own a direction. For d < n only
    // normalization is possible.
    const bool orthonormalize = d >= n;
    for (int tok = 0; tok < n; ++tok) {
        double* row = rows.data() + static_cast<size_t>(tok) * d;
        if (orthonormalize) {
            for (int prev = 0; prev < tok; ++prev) {
                const double* prow = rows.data() + static_cast<size_t>(prev) * d;
                double dot = 0.0;
                for (int c = 0; c < d; ++c) dot += row[c] * prow[c];
                for (int c = 0; c < d; ++c) row[c] -= dot * prow[c];
            }
        }
        const double norm = row_norm(row, d);
        if (norm < 1e-12) throw ValidationError("TokenEmbeddings::random: degenerate draw, change the seed");
        for (int c = 0; c < d; ++c) row[c] /= norm;
    }
    return from_rows(n, d, rows, rows);
}

NormalizedMap normalize_map(const AttentionMap& a, double eps_floor) {
    if (a.h < 1 || a.w < 1) throw ValidationError("normalize_map: empty map");
    double total = 0.0;
    for (double x : a.v) total += x + eps_floor;
    if (total <= 0.0) throw AllZeroMap("normalize_map: all entries zero and eps_floor disabled");
    NormalizedMap p(a.h, a.w);
    for (size_t k = 0; k < a.v.size(); ++k) p.p[k] = (a.v[k] + eps_floor) / total;
    return p;
}

Point2D center_of_mass(const NormalizedMap& p) {
    Point2D c;
    for (int i = 0; i < p.h; ++i)
        for (int j = 0; j < p.w; ++j) {
            const double m = p.at(i, j);
            c.row += m * i;
            c.col += m * j;
        }
    return c;
}

AttentionStack compute_attention(const LatentGrid& z, const TokenEmbeddings& tok) {
    if (z.d != tok.d) throw DimMismatch("compute_attention: latent depth != key dimension");
    AttentionStack a(z.h, z.w, tok.n);
    std::vector<double> logits(tok.n);
    for (int i = 0; i < z.h; ++i) {
        for (int j = 0; j < z.w; ++j) {
            const double* cell = z.v.data() + (static_cast<size_t>(i) * z.w + j) * z.d;
            double maxlog = -HUGE_VAL;
            for (int t = 0; t < tok.n; ++t) {
                const double* key = tok.keys.data() + static_cast<size_t>(t) * tok.d;
                double dot = 0.0;
                for (int c = 0; c < z.d; ++c) dot += cell[c] * key[c];
                logits[t] = dot / tok.scale;
                maxlog = std::max(maxlog, logits[t]);
            }
            double denom = 0.0;
            for (int t = 0; t < tok.n; ++t) {
                logits[t] = std::exp(logits[t] - maxlog);
                denom += logits[t];
            }
            for (int t = 0; t < tok.n; ++t) a.at(i, j, t) = logits[t] / denom;
        }
    }
    return a;
}

namespace {

// Mirror index into [0, n): ... 2 1 | 0 1 2 ... n-1 | n-1 n-2 ...
int mirror_index(int p, int n) {
    while (p < 0 || p >= n) {
        if (p < 0) p = -p - 1;
        if (p >= n) p = 2 * n - 1 - p;
    }
    return p;
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& x : k) x /= sum;
    return k;
}

}  // namespace

AttentionMap smooth_map(const AttentionMap& a, double sigma) {
    if (sigma < 0.0) throw ValidationError("smooth_map: sigma must be >= 0");
    if (sigma == 0.0) return a;
    const auto kernel = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;

    AttentionMap tmp(a.h, a.w);
    for (int i = 0; i < a.h; ++i)
        for (int j = 0; j < a.w; ++j) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += kernel[k + radius] * a.at(mirror_index(i + k, a.h), j);
            tmp.at(i, j) = s;
        }
    AttentionMap out(a.h, a.w);
    for (int i = 0; i < a.h; ++i)
        for (int j = 0; j < a.w; ++j) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += kernel[k + radius] * tmp.at(i, mirror_index(j + k, a.w));
            out.at(i, j) = s;
        }
    return out;
}

}  // namespace gsn
