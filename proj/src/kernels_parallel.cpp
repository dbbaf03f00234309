#include <omp.h>

#include "fairmine/kernels.hpp"
#include "fairmine/model.hpp"
#include "kernels_detail.hpp"

namespace fairmine::kernels {

void cross_sqdist(const RowMatrix& a, const RowMatrix& b, RowMatrix& out) {
  detail::check_cols(a, b);
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = RowMatrix(a.rows(), b.rows());
  const auto n = static_cast<std::int64_t>(a.rows());
  const std::size_t m = b.rows(), d = a.cols();
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* ai = a.row(i).data();
    double* oi = out.row(i).data();
    for (std::size_t j = 0; j < m; ++j) oi[j] = detail::sqdist(ai, b.row(j).data(), d);
  }
}

void embed_rows(const EmbeddingNetwork& net, const RowMatrix& features, RowMatrix& out) {
  if (out.rows() != features.rows() || out.cols() != net.output_dim())
    out = RowMatrix(features.rows(), net.output_dim());
  const auto n = static_cast<std::int64_t>(features.rows());
#pragma omp parallel
  {
    Vector s1, s2;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) net.embed_into(features.row(i), out.row(i), s1, s2);
  }
}

PairCount count_impostors_below(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                const RowMatrix& docs, std::span<const IdentityId> doc_ids,
                                double theta) {
  detail::check_cols(selfies, docs);
  detail::check_ids(selfies, selfie_ids);
  detail::check_ids(docs, doc_ids);
  const auto n = static_cast<std::int64_t>(selfies.rows());
  const std::size_t m = docs.rows(), d = selfies.cols();
  std::uint64_t accepted = 0, comparisons = 0;
#pragma omp parallel for schedule(static) reduction(+ : accepted, comparisons)
  for (std::int64_t i = 0; i < n; ++i) {
    const double* si = selfies.row(i).data();
    for (std::size_t j = 0; j < m; ++j) {
      if (selfie_ids[i] == doc_ids[j]) continue;
      ++comparisons;
      if (detail::sqdist(si, docs.row(j).data(), d) < theta) ++accepted;
    }
  }
  return {accepted, comparisons};
}

std::vector<double> impostor_distances(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                       const RowMatrix& docs, std::span<const IdentityId> doc_ids) {
  detail::check_cols(selfies, docs);
  detail::check_ids(selfies, selfie_ids);
  detail::check_ids(docs, doc_ids);
  const std::size_t n = selfies.rows(), m = docs.rows(), d = selfies.cols();
  // Row offsets first so each thread writes a disjoint slice in serial order.
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < m; ++j) c += selfie_ids[i] != doc_ids[j];
    offset[i + 1] = offset[i] + c;
  }
  std::vector<double> out(offset[n]);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    std::size_t k = offset[i];
    const double* si = selfies.row(i).data();
    for (std::size_t j = 0; j < m; ++j)
      if (selfie_ids[i] != doc_ids[j]) out[k++] = detail::sqdist(si, docs.row(j).data(), d);
  }
  return out;
}

std::uint64_t count_genuine_rejected(const RowMatrix& selfies, const RowMatrix& docs, double theta) {
  detail::check_cols(selfies, docs);
  if (selfies.rows() != docs.rows()) throw DimensionError("genuine sets differ in size");
  const auto n = static_cast<std::int64_t>(selfies.rows());
  std::uint64_t rejected = 0;
#pragma omp parallel for schedule(static) reduction(+ : rejected)
  for (std::int64_t i = 0; i < n; ++i)
    if (detail::sqdist(selfies.row(i).data(), docs.row(i).data(), selfies.cols()) >= theta) ++rejected;
  return rejected;
}

void pick_semi_hard(const RowMatrix& dist, std::span<const IdentityId> ids, double margin,
                    std::span<const double> uniforms, std::span<std::int64_t> picked,
                    std::span<std::uint32_t> counts) {
  detail::check_pick_args(dist, ids, uniforms, picked, counts);
  const auto n = static_cast<std::int64_t>(dist.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t a = 0; a < n; ++a) detail::pick_row(dist, ids, margin, uniforms[a], a, picked[a], counts[a]);
}

RowMatrix transpose(const RowMatrix& m) {
  RowMatrix t(m.cols(), m.rows());
  const auto rows = static_cast<std::int64_t>(m.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < rows; ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) t.at(j, i) = m.at(i, j);
  return t;
}

}  // namespace fairmine::kernels
