#pragma once

// Brute-force reference implementations and random instance generators used
// by the unit and acceptance tests. Nothing here calls the kernels.

#include <cmath>
#include <cstdint>
#include <vector>

#include "fairmine/eval.hpp"
#include "fairmine/mining.hpp"
#include "fairmine/model.hpp"
#include "fairmine/random.hpp"

namespace oracle {

using fairmine::IdentityId;
using fairmine::RowMatrix;

inline double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

struct Counts {
  std::uint64_t accepted = 0;
  std::uint64_t comparisons = 0;
};

inline Counts far_counts(const fairmine::EvalSet& s, const fairmine::EvalSet& d, double theta) {
  Counts c;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (s.ids[i] == d.ids[j]) continue;
      ++c.comparisons;
      if (sqdist(s.selfie.row(i), d.doc.row(j)) < theta) ++c.accepted;
    }
  return c;
}

inline std::uint64_t frr_count(const fairmine::EvalSet& s, double theta) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (sqdist(s.selfie.row(i), s.doc.row(i)) >= theta) ++r;
  return r;
}

inline std::vector<double> impostors(const fairmine::EvalSet& s, const fairmine::EvalSet& d) {
  std::vector<double> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j)
      if (s.ids[i] != d.ids[j]) out.push_back(sqdist(s.selfie.row(i), d.doc.row(j)));
  return out;
}

inline double far_at(const std::vector<double>& d, double theta) {
  std::size_t n = 0;
  for (double x : d) n += x < theta;
  return static_cast<double>(n) / static_cast<double>(d.size());
}

// Candidates for anchor pair a as image indices, by direct enumeration of the
// batch's image list.
inline std::vector<std::uint32_t> candidates(const fairmine::MiningBatch& b, std::size_t a, fairmine::Domain anchor,
                                             double margin) {
  const std::size_t n = b.size();
  const std::size_t ai = b.image_index(a, anchor);
  const fairmine::Domain other = anchor == fairmine::Domain::Selfie ? fairmine::Domain::Doc : fairmine::Domain::Selfie;
  const std::size_t pi = b.image_index(a, other);
  const double dap = sqdist(b.embedding(ai), b.embedding(pi));
  std::vector<std::uint32_t> out;
  for (std::size_t img = 0; img < 2 * n; ++img) {
    if (b.domain_of(img) != other) continue;
    if (b.identity_of(img) == b.identity_of(ai)) continue;
    if (dap + margin > sqdist(b.embedding(ai), b.embedding(img))) out.push_back(static_cast<std::uint32_t>(img));
  }
  return out;
}

// Forward pass written directly from the layer definition.
inline std::vector<double> forward(const fairmine::EmbeddingNetwork& net, std::span<const double> x) {
  auto& mutable_net = const_cast<fairmine::EmbeddingNetwork&>(net);
  std::vector<double> h(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const auto w = mutable_net.weights(l);
    const auto b = mutable_net.bias(l);
    std::vector<double> next(b.size());
    for (std::size_t o = 0; o < b.size(); ++o) {
      double s = b[o];
      for (std::size_t i = 0; i < h.size(); ++i) s += w[o * h.size() + i] * h[i];
      if (l + 1 < net.layer_count())
        s = net.shape().activation == fairmine::Activation::Tanh ? std::tanh(s) : std::max(s, 0.0);
      next[o] = s;
    }
    h = std::move(next);
  }
  double norm = 0.0;
  for (double v : h) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : h) v /= norm;
  return h;
}

// Random instances.

inline RowMatrix unit_rows(std::size_t n, std::size_t d, fairmine::Rng& rng) {
  RowMatrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (double& v : m.row(i)) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : m.row(i)) v /= norm;
  }
  return m;
}

// Identity ids with some repeats, so identity exclusion differs from index exclusion.
inline std::vector<IdentityId> ids_with_repeats(std::size_t n, fairmine::Rng& rng) {
  std::vector<IdentityId> ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && rng.uniform() < 0.1)
      ids.push_back(ids[rng.below(i)]);
    else
      ids.push_back(IdentityId{1000 + i});
  }
  return ids;
}

// Genuine rows are close to each other; values land on a coarse grid now and
// then so that ties at theta are exercised.
inline fairmine::EvalSet eval_set(std::size_t n, std::size_t d, fairmine::Rng& rng) {
  fairmine::EvalSet s;
  s.selfie = unit_rows(n, d, rng);
  s.doc = RowMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double v = s.selfie.at(i, k) + 0.3 * rng.normal();
      s.doc.at(i, k) = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < d; ++k) s.doc.at(i, k) /= norm;
  }
  s.ids = ids_with_repeats(n, rng);
  s.labels.assign(n, fairmine::DemographicLabel{});
  return s;
}

inline fairmine::MiningBatch batch(std::size_t n, std::size_t d, double noise, fairmine::Rng& rng) {
  fairmine::MiningBatch b;
  b.ids = ids_with_repeats(n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    b.pairs.push_back(i);
    b.groups.push_back(0);
  }
  b.selfie = unit_rows(n, d, rng);
  b.doc = RowMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double v = b.selfie.at(i, k) + noise * rng.normal();
      b.doc.at(i, k) = v;
      norm += v * v;
    }
    for (std::size_t k = 0; k < d; ++k) b.doc.at(i, k) /= std::sqrt(norm);
  }
  return b;
}

inline std::vector<double> random_vector(std::size_t n, fairmine::Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

// Finite-difference gradient check; returns max relative error over all
// parameters, or -1 when no triplet is safely away from the hinge kink.
struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t triplets_used = 0;
};

inline GradCheck gradient_check(std::size_t input_dim, std::vector<std::size_t> widths, std::size_t triplets,
                                double margin, double h, fairmine::Rng& rng) {
  using namespace fairmine;
  NetworkShape shape{input_dim, std::move(widths), Activation::Tanh};
  EmbeddingNetwork net(shape, rng);
  std::vector<std::vector<double>> store;
  for (std::size_t t = 0; t < 3 * triplets; ++t) store.push_back(random_vector(input_dim, rng));
  std::vector<TripletInputs> all;
  for (std::size_t t = 0; t < triplets; ++t) all.push_back({store[3 * t], store[3 * t + 1], store[3 * t + 2]});

  // Drop triplets too close to the hinge boundary.
  std::vector<TripletInputs> kept;
  for (const auto& t : all) {
    const auto a = forward(net, t.anchor), p = forward(net, t.positive), n = forward(net, t.negative);
    if (std::abs(sqdist(a, p) - sqdist(a, n) + margin) >= 1e-6) kept.push_back(t);
  }
  GradCheck out;
  out.triplets_used = kept.size();
  if (kept.empty()) return out;

  const LossGradient lg = loss_gradients(net, kept, margin);
  auto params = net.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + h;
    const double up = mean_triplet_loss(net, kept, margin);
    params[k] = saved - h;
    const double down = mean_triplet_loss(net, kept, margin);
    params[k] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = lg.grad[k];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic - numeric) / denom);
  }
  return out;
}

}  // namespace oracle
