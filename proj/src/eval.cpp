#include "fairmine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fairmine/io.hpp"

namespace fairmine {

EvalSet EvalSet::subset(std::span<const std::size_t> rows) const {
  EvalSet out{RowMatrix(rows.size(), selfie.cols()), RowMatrix(rows.size(), doc.cols()), {}, {}};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    std::copy_n(selfie.row(r).begin(), selfie.cols(), out.selfie.row(k).begin());
    std::copy_n(doc.row(r).begin(), doc.cols(), out.doc.row(k).begin());
    out.ids.push_back(ids[r]);
    out.labels.push_back(labels[r]);
  }
  return out;
}

EvalSet EvalSet::head(std::size_t n) const {
  if (n > size()) throw DimensionError("eval set has only " + std::to_string(size()) + " pairs");
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return subset(rows);
}

EvalSet embed_eval_set(const EmbeddingNetwork& net, const Dataset& dataset) {
  const std::size_t n = dataset.size(), dim = dataset.input_dim();
  RowMatrix selfie_in(n, dim), doc_in(n, dim);
  EvalSet out;
  for (std::size_t i = 0; i < n; ++i) {
    const SamplePair& p = dataset[i];
    std::copy(p.selfie.begin(), p.selfie.end(), selfie_in.row(i).begin());
    std::copy(p.doc.begin(), p.doc.end(), doc_in.row(i).begin());
    out.ids.push_back(p.identity);
    out.labels.push_back(p.label);
  }
  kernels::embed_rows(net, selfie_in, out.selfie);
  kernels::embed_rows(net, doc_in, out.doc);
  return out;
}

std::uint64_t genuine_rejections(const EvalSet& set, double theta) {
  if (set.size() == 0) throw Error("FRR of an empty evaluation set");
  return kernels::count_genuine_rejected(set.selfie, set.doc, theta);
}

double frr(const EvalSet& set, double theta) {
  return static_cast<double>(genuine_rejections(set, theta)) / static_cast<double>(set.size());
}

PairCount far_count(const EvalSet& selfies, const EvalSet& docs, double theta) {
  const PairCount c = kernels::count_impostors_below(selfies.selfie, selfies.ids, docs.doc, docs.ids, theta);
  if (c.comparisons == 0) throw Error("no impostor pairs available for FAR");
  return c;
}

double far(const EvalSet& selfies, const EvalSet& docs, double theta) { return rate(far_count(selfies, docs, theta)); }

std::vector<double> impostor_distances(const EvalSet& selfies, const EvalSet& docs) {
  return kernels::impostor_distances(selfies.selfie, selfies.ids, docs.doc, docs.ids);
}

double calibrate_from_distances(std::vector<double> d, double target_far) {
  if (!(target_far > 0.0 && target_far <= 1.0)) throw ConfigError("target FAR must lie in (0, 1]");
  const std::size_t n = d.size();
  if (n == 0 || static_cast<double>(n) * target_far < 1.0)
    throw ResolutionError("FAR " + format_double(target_far) + " needs at least " +
                          std::to_string(static_cast<std::uint64_t>(std::ceil(1.0 / target_far))) +
                          " impostor comparisons, have " + std::to_string(n));
  // Largest count c with c / n <= target.
  auto c = static_cast<std::size_t>(std::floor(target_far * static_cast<double>(n)));
  while (c < n && static_cast<double>(c + 1) / static_cast<double>(n) <= target_far) ++c;
  while (c > 0 && static_cast<double>(c) / static_cast<double>(n) > target_far) --c;
  if (c >= n) return std::nextafter(*std::max_element(d.begin(), d.end()), std::numeric_limits<double>::infinity());
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(c), d.end());
  return d[c];
}

double calibrate_threshold(const EvalSet& selfies, const EvalSet& docs, double target_far) {
  return calibrate_from_distances(impostor_distances(selfies, docs), target_far);
}

FarMatrix far_matrix(std::span<const EvalSet> pools, Axis axis, double theta, std::size_t pool_size) {
  if (pools.size() != group_count(axis)) throw DimensionError("need one pool per group for the FAR matrix");
  std::vector<EvalSet> heads;
  for (std::size_t g = 0; g < pools.size(); ++g) {
    if (pools[g].size() < pool_size)
      throw ResolutionError("pool for " + group_name(axis, g) + " holds " + std::to_string(pools[g].size()) +
                            " pairs, " + std::to_string(pool_size) + " required");
    heads.push_back(pools[g].head(pool_size));
  }
  FarMatrix m;
  m.axis = axis;
  for (std::size_t g = 0; g < pools.size(); ++g) m.groups.push_back(group_name(axis, g));
  for (std::size_t g = 0; g < heads.size(); ++g)
    for (std::size_t h = 0; h < heads.size(); ++h) m.cells.push_back(far_count(heads[g], heads[h], theta));
  return m;
}

bool RocCurve::is_monotone() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].theta > points[i - 1].theta)) return false;
    if (points[i].far < points[i - 1].far) return false;
    if (points[i].frr > points[i - 1].frr) return false;
  }
  return true;
}

RocCurve roc_curve(const EvalSet& genuine, const EvalSet& impostor_selfies, const EvalSet& impostor_docs,
                   std::vector<double> grid) {
  if (grid.empty()) throw ConfigError("ROC grid is empty");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> imp = impostor_distances(impostor_selfies, impostor_docs);
  if (imp.empty()) throw Error("no impostor pairs available for ROC");
  std::sort(imp.begin(), imp.end());
  std::vector<double> gen;
  for (std::size_t i = 0; i < genuine.size(); ++i) gen.push_back(squared_distance(genuine.selfie.row(i), genuine.doc.row(i)));
  if (gen.empty()) throw Error("no genuine pairs available for ROC");
  std::sort(gen.begin(), gen.end());
  RocCurve curve;
  for (double t : grid) {
    // Count of values strictly below t.
    const auto accepted = static_cast<double>(std::lower_bound(imp.begin(), imp.end(), t) - imp.begin());
    const auto below = static_cast<double>(std::lower_bound(gen.begin(), gen.end(), t) - gen.begin());
    curve.points.push_back({t, accepted / static_cast<double>(imp.size()),
                            (static_cast<double>(gen.size()) - below) / static_cast<double>(gen.size())});
  }
  return curve;
}

RocSummary average_roc(std::span<const RocCurve> curves) {
  if (curves.empty()) throw ConfigError("no ROC curves to average");
  const std::size_t n = curves.front().points.size();
  RocSummary s;
  for (std::size_t i = 0; i < n; ++i) {
    double fm = 0.0, rm = 0.0;
    for (const RocCurve& c : curves) {
      if (c.points.size() != n || c.points[i].theta != curves.front().points[i].theta)
        throw DimensionError("ROC curves are on different grids");
      fm += c.points[i].far;
      rm += c.points[i].frr;
    }
    const auto k = static_cast<double>(curves.size());
    fm /= k;
    rm /= k;
    double fv = 0.0, rv = 0.0;
    for (const RocCurve& c : curves) {
      fv += (c.points[i].far - fm) * (c.points[i].far - fm);
      rv += (c.points[i].frr - rm) * (c.points[i].frr - rm);
    }
    s.theta.push_back(curves.front().points[i].theta);
    s.far_mean.push_back(fm);
    s.far_std.push_back(std::sqrt(fv / k));
    s.frr_mean.push_back(rm);
    s.frr_std.push_back(std::sqrt(rv / k));
  }
  return s;
}

std::vector<RocCurve> roc_over_splits(const EvalSet& set, const std::vector<double>& grid, std::size_t splits,
                                      double test_fraction, Rng& rng) {
  if (splits == 0) throw ConfigError("need at least one ROC split");
  if (!(test_fraction > 0.0 && test_fraction <= 1.0)) throw ConfigError("split fraction must lie in (0, 1]");
  const auto n_test = std::max<std::size_t>(2, static_cast<std::size_t>(test_fraction * static_cast<double>(set.size())));
  if (n_test > set.size()) throw ConfigError("evaluation set too small for the requested split");
  std::vector<RocCurve> out;
  std::vector<std::size_t> order(set.size());
  for (std::size_t s = 0; s < splits; ++s) {
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::size_t> rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::sort(rows.begin(), rows.end());
    const EvalSet part = set.subset(rows);
    out.push_back(roc_curve(part, part, part, grid));
  }
  return out;
}

std::vector<double> far_level_grid(std::vector<double> impostor, std::span<const double> far_levels) {
  if (impostor.empty()) throw Error("no impostor distances for the ROC grid");
  std::sort(impostor.begin(), impostor.end());
  std::vector<double> grid;
  for (double level : far_levels) {
    auto k = static_cast<std::size_t>(std::floor(level * static_cast<double>(impostor.size())));
    k = std::min(k, impostor.size() - 1);
    grid.push_back(impostor[k]);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<PairCount> gender_far(std::span<const EvalSet> pools, double theta) {
  if (pools.size() != kGenderCount) throw DimensionError("need one pool per gender");
  std::vector<PairCount> out;
  for (std::size_t g = 0; g < pools.size(); ++g) {
    if (pools[g].size() == 0) throw Error("gender pool " + group_name(Axis::Gender, g) + " is empty");
    out.push_back(far_count(pools[g], pools[g], theta));
  }
  return out;
}

}  // namespace fairmine
