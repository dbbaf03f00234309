#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fairmine/core.hpp"

namespace fairmine::kernels::detail {

inline double sqdist(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

inline void check_cols(const RowMatrix& a, const RowMatrix& b) {
  if (a.cols() != b.cols())
    throw DimensionError("kernel operands have dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.cols()));
}

inline void check_ids(const RowMatrix& m, std::span<const IdentityId> ids) {
  if (m.rows() != ids.size()) throw DimensionError("identity list does not match matrix rows");
}

// Candidate scan for one anchor row; shared by both kernel flavours.
inline void pick_row(const RowMatrix& dist, std::span<const IdentityId> ids, double margin, double u,
                     std::size_t a, std::int64_t& picked, std::uint32_t& count) {
  const std::size_t n = dist.cols();
  const double* row = dist.row(a).data();
  const double limit = row[a] + margin;
  const IdentityId self = ids[a];
  std::uint32_t c = 0;
  for (std::size_t j = 0; j < n; ++j)
    if (ids[j] != self && row[j] < limit) ++c;
  count = c;
  if (c == 0) {
    picked = -1;
    return;
  }
  auto target = static_cast<std::uint32_t>(u * static_cast<double>(c));
  if (target >= c) target = c - 1;
  for (std::size_t j = 0; j < n; ++j) {
    if (ids[j] != self && row[j] < limit) {
      if (target == 0) {
        picked = static_cast<std::int64_t>(j);
        return;
      }
      --target;
    }
  }
}

inline void check_pick_args(const RowMatrix& dist, std::span<const IdentityId> ids,
                            std::span<const double> uniforms, std::span<std::int64_t> picked,
                            std::span<std::uint32_t> counts) {
  const std::size_t n = dist.rows();
  if (dist.cols() != n || ids.size() != n || uniforms.size() != n || picked.size() != n ||
      counts.size() != n)
    throw DimensionError("pick_semi_hard: inconsistent operand sizes");
}

}  // namespace fairmine::kernels::detail
