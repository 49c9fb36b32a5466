#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsn/grid.hpp"

namespace gsn {

// Additive floor applied to raw attention scores before spatial
// normalization. Keeps the KL terms of downstream metrics finite; pass 0 to
// disable flooring.
inline constexpr double kEpsFloor = 1e-12;

// Per-token key/value rows standing in for projected text embeddings.
// Keys are unit-norm by construction; scale is sqrt(D), the usual
// dot-product attention temperature.
struct TokenEmbeddings {
    int n = 0;
    int d = 0;
    std::vector<double> keys;    // n x d, row-major, rows unit-norm
    std::vector<double> values;  // n x d, row-major
    double scale = 1.0;          // sqrt(d)

    std::span<const double> key(int tok) const { return {keys.data() + static_cast<size_t>(tok) * d, static_cast<size_t>(d)}; }
    std::span<const double> value(int tok) const {
        return {values.data() + static_cast<size_t>(tok) * d, static_cast<size_t>(d)};
    }

    // Builds embeddings from explicit rows; key rows are rescaled to unit
    // Euclidean norm. Throws ValidationError on a zero key row.
    static TokenEmbeddings from_rows(int n, int d, std::vector<double> keys, std::vector<double> values);

    // Seeded random embeddings. Rows are drawn Gaussian and orthonormalized
    // when d >= n (each token then owns an independent direction); for d < n
    // rows are only normalized. Keys and values share the same rows, so
    // pulling a latent toward a token's value raises that token's logit.
    static TokenEmbeddings random(int n, int d, uint64_t seed);
};

// Spatial normalization of a raw attention map:
//   p[i,j] = (a[i,j] + eps) / sum_kh (a[k,h] + eps).
// Throws AllZeroMap when the map is identically zero and eps == 0.
NormalizedMap normalize_map(const AttentionMap& a, double eps_floor = kEpsFloor);

// Probability-weighted mean cell coordinate of a normalized map.
Point2D center_of_mass(const NormalizedMap& p);

// Per-cell softmax over tokens of scaled key dot products:
//   A[i,j,n] = softmax_n( <z[i,j,.], key_n> / scale ).
// Throws DimMismatch when z.d != tok.d.
AttentionStack compute_attention(const LatentGrid& z, const TokenEmbeddings& tok);

// Separable discrete Gaussian blur with half-sample symmetric (mirrored)
// boundary handling, which preserves total mass. sigma == 0 returns the
// input unchanged.
AttentionMap smooth_map(const AttentionMap& a, double sigma);

}  // namespace gsn
