#include "fairmine/kernels.hpp"
#include "fairmine/model.hpp"
#include "kernels_detail.hpp"

namespace fairmine::kernels::serial {

void cross_sqdist(const RowMatrix& a, const RowMatrix& b, RowMatrix& out) {
  detail::check_cols(a, b);
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = RowMatrix(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      out.at(i, j) = detail::sqdist(a.row(i).data(), b.row(j).data(), a.cols());
}

void embed_rows(const EmbeddingNetwork& net, const RowMatrix& features, RowMatrix& out) {
  if (out.rows() != features.rows() || out.cols() != net.output_dim())
    out = RowMatrix(features.rows(), net.output_dim());
  Vector s1, s2;
  for (std::size_t i = 0; i < features.rows(); ++i) net.embed_into(features.row(i), out.row(i), s1, s2);
}

PairCount count_impostors_below(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                const RowMatrix& docs, std::span<const IdentityId> doc_ids,
                                double theta) {
  detail::check_cols(selfies, docs);
  detail::check_ids(selfies, selfie_ids);
  detail::check_ids(docs, doc_ids);
  PairCount c;
  for (std::size_t i = 0; i < selfies.rows(); ++i)
    for (std::size_t j = 0; j < docs.rows(); ++j) {
      if (selfie_ids[i] == doc_ids[j]) continue;
      ++c.comparisons;
      if (detail::sqdist(selfies.row(i).data(), docs.row(j).data(), selfies.cols()) < theta) ++c.accepted;
    }
  return c;
}

std::vector<double> impostor_distances(const RowMatrix& selfies, std::span<const IdentityId> selfie_ids,
                                       const RowMatrix& docs, std::span<const IdentityId> doc_ids) {
  detail::check_cols(selfies, docs);
  detail::check_ids(selfies, selfie_ids);
  detail::check_ids(docs, doc_ids);
  std::vector<double> out;
  out.reserve(selfies.rows() * docs.rows());
  for (std::size_t i = 0; i < selfies.rows(); ++i)
    for (std::size_t j = 0; j < docs.rows(); ++j)
      if (selfie_ids[i] != doc_ids[j])
        out.push_back(detail::sqdist(selfies.row(i).data(), docs.row(j).data(), selfies.cols()));
  return out;
}

std::uint64_t count_genuine_rejected(const RowMatrix& selfies, const RowMatrix& docs, double theta) {
  detail::check_cols(selfies, docs);
  if (selfies.rows() != docs.rows()) throw DimensionError("genuine sets differ in size");
  std::uint64_t rejected = 0;
  for (std::size_t i = 0; i < selfies.rows(); ++i)
    if (detail::sqdist(selfies.row(i).data(), docs.row(i).data(), selfies.cols()) >= theta) ++rejected;
  return rejected;
}

void pick_semi_hard(const RowMatrix& dist, std::span<const IdentityId> ids, double margin,
                    std::span<const double> uniforms, std::span<std::int64_t> picked,
                    std::span<std::uint32_t> counts) {
  detail::check_pick_args(dist, ids, uniforms, picked, counts);
  for (std::size_t a = 0; a < dist.rows(); ++a)
    detail::pick_row(dist, ids, margin, uniforms[a], a, picked[a], counts[a]);
}

}  // namespace fairmine::kernels::serial
