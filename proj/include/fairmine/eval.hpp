#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairmine/core.hpp"
#include "fairmine/kernels.hpp"
#include "fairmine/model.hpp"
#include "fairmine/random.hpp"

namespace fairmine {

using kernels::PairCount;

/// Embedded genuine pairs: row i of selfie and doc belong to identity ids[i].
struct EvalSet {
  RowMatrix selfie;
  RowMatrix doc;
  std::vector<IdentityId> ids;
  std::vector<DemographicLabel> labels;

  std::size_t size() const { return ids.size(); }
  EvalSet subset(std::span<const std::size_t> rows) const;
  /// First n rows.
  EvalSet head(std::size_t n) const;
};

EvalSet embed_eval_set(const EmbeddingNetwork& net, const Dataset& dataset);

inline double rate(const PairCount& c) {
  return c.comparisons == 0 ? 0.0 : static_cast<double>(c.accepted) / static_cast<double>(c.comparisons);
}

/// Fraction of genuine pairs with D2 >= theta.
double frr(const EvalSet& set, double theta);
std::uint64_t genuine_rejections(const EvalSet& set, double theta);

/// Impostor comparisons are all (selfie i, doc j) with different identity
/// ids; accepted when D2 < theta. Pass the same set twice for the within-set
/// protocol, or two disjoint sets.
PairCount far_count(const EvalSet& selfies, const EvalSet& docs, double theta);
double far(const EvalSet& selfies, const EvalSet& docs, double theta);

std::vector<double> impostor_distances(const EvalSet& selfies, const EvalSet& docs);

/// Largest value theta on the grid {impostor distances} U {just above the max}
/// with FAR(theta) <= target. Throws ResolutionError when fewer than
/// 1 / target comparisons are available.
double calibrate_from_distances(std::vector<double> impostor, double target_far);
double calibrate_threshold(const EvalSet& selfies, const EvalSet& docs, double target_far);

struct FarMatrix {
  Axis axis = Axis::Continent;
  std::vector<std::string> groups;
  std::vector<PairCount> cells;  // row = selfie group, column = doc group

  std::size_t size() const { return groups.size(); }
  const PairCount& cell(std::size_t g, std::size_t h) const { return cells[g * size() + h]; }
  double far(std::size_t g, std::size_t h) const { return rate(cell(g, h)); }
};

/// pools[g] must hold at least pool_size pairs; the first pool_size are used.
FarMatrix far_matrix(std::span<const EvalSet> pools, Axis axis, double theta, std::size_t pool_size);

struct RocPoint {
  double theta = 0.0;
  double far = 0.0;
  double frr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  /// theta strictly increasing, FAR non-decreasing, FRR non-increasing.
  bool is_monotone() const;
};

/// grid is sorted and deduplicated before use.
RocCurve roc_curve(const EvalSet& genuine, const EvalSet& impostor_selfies, const EvalSet& impostor_docs,
                   std::vector<double> grid);

struct RocSummary {
  std::vector<double> theta;
  std::vector<double> far_mean, far_std;
  std::vector<double> frr_mean, frr_std;
};

/// Pointwise mean and population standard deviation of curves on one grid.
RocSummary average_roc(std::span<const RocCurve> curves);

/// k random splits; the ROC of each held-out part (test_fraction of the rows)
/// uses that part for both genuine and impostor comparisons.
std::vector<RocCurve> roc_over_splits(const EvalSet& set, const std::vector<double>& grid, std::size_t splits,
                                      double test_fraction, Rng& rng);

/// Thresholds at which the impostor distances reach the given FAR levels.
std::vector<double> far_level_grid(std::vector<double> impostor, std::span<const double> far_levels);

/// Within-gender FAR at one threshold; pools indexed by Gender.
std::vector<PairCount> gender_far(std::span<const EvalSet> pools, double theta);

}  // namespace fairmine
