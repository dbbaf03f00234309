#pragma once

// Data-parallel inner loops. Every kernel exists twice with the same
// signature: fairmine::kernels (OpenMP) and fairmine::kernels::serial (plain
// loops, kept as the reference for tests and benchmarks). Both produce
// bit-identical results for any thread count: per-element arithmetic is the
// same and reductions are over integers only.

#include <cstdint>
#include <span>
#include <vector>

#include "fairmine/core.hpp"

namespace fairmine {
class EmbeddingNetwork;
}

namespace fairmine::kernels {

struct PairCount {
  std::uint64_t accepted = 0;
  std::uint64_t comparisons = 0;
  friend bool operator==(const PairCount&, const PairCount&) = default;
};

/// out(i, j) = |a_i - b_j|^2, resized to a.rows() x b.rows().
void cross_sqdist(const RowMatrix& a, const RowMatrix& b, RowMatrix& out);

/// Row-wise forward pass into unit-norm embeddings.
void embed_rows(const EmbeddingNetwork& net, const RowMatrix& features, RowMatrix& out);

/// Pairs (i, j) with differing identity; accepted counts those with distance < theta.
PairCount count_impostors_below(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                const RowMatrix& docs, std::span<const IdentityId> doc_ids,
                                double theta);

/// Distances of all differing-identity pairs in selfie-major order.
std::vector<double> impostor_distances(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                       const RowMatrix& docs, std::span<const IdentityId> doc_ids);

/// Genuine pairs (row i of both matrices) with distance >= theta.
std::uint64_t count_genuine_rejected(const RowMatrix& selfies, const RowMatrix& docs, double theta);

// Semi-hard negative choice over a square anchor-major distance matrix whose
// diagonal holds the anchor-positive distances. For anchor a the candidates
// are columns c with ids[c] != ids[a] and dist(a, c) < dist(a, a) + margin,
// in ascending order; picked[a] is candidate floor(uniforms[a] * count), or
// -1 when there is none. counts[a] receives the candidate count.
void pick_semi_hard(const RowMatrix& dist, std::span<const IdentityId> ids, double margin,
                    std::span<const double> uniforms, std::span<std::int64_t> picked,
                    std::span<std::uint32_t> counts);

RowMatrix transpose(const RowMatrix& m);

namespace serial {

void cross_sqdist(const RowMatrix& a, const RowMatrix& b, RowMatrix& out);
void embed_rows(const EmbeddingNetwork& net, const RowMatrix& features, RowMatrix& out);
PairCount count_impostors_below(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                const RowMatrix& docs, std::span<const IdentityId> doc_ids,
                                double theta);
std::vector<double> impostor_distances(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                       const RowMatrix& docs, std::span<const IdentityId> doc_ids);
std::uint64_t count_genuine_rejected(const RowMatrix& selfies, const RowMatrix& docs, double theta);
void pick_semi_hard(const RowMatrix& dist, std::span<const IdentityId> ids, double margin,
                    std::span<const double> uniforms, std::span<std::int64_t> picked,
                    std::span<std::uint32_t> counts);

}  // namespace serial

}  // namespace fairmine::kernels
