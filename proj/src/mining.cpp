#include "fairmine/mining.hpp"

#include <ostream>

#include "fairmine/kernels.hpp"

namespace fairmine {

namespace {

std::size_t draw_member(const std::vector<std::size_t>& members, Rng& rng) {
  return members[static_cast<std::size_t>(rng.below(members.size()))];
}

void require_nonempty(const Dataset& dataset, Axis axis, std::span<const double> weights) {
  const auto& members = dataset.members(axis);
  for (std::size_t g = 0; g < weights.size(); ++g)
    if (weights[g] > 0.0 && members[g].empty())
      throw ConfigError("group " + group_name(axis, g) + " has positive sampling weight but no samples");
}

}  // namespace

MiningBatch assemble_batch(const Dataset& dataset, const SamplerSpec& sampler, std::size_t n, Rng& rng) {
  if (n < 2) throw ConfigError("selection batch must hold at least 2 pairs");
  if (dataset.empty()) throw ConfigError("cannot assemble a batch from an empty dataset");
  sampler.validate();
  MiningBatch b;
  b.pairs.reserve(n);
  const auto& members = dataset.members(sampler.axis);
  switch (sampler.kind) {
    case SamplerKind::Natural:
      for (std::size_t i = 0; i < n; ++i) b.pairs.push_back(static_cast<std::size_t>(rng.below(dataset.size())));
      break;
    case SamplerKind::FixedWeights:
    case SamplerKind::DynamicWeights: {
      const Vector p = probabilities(sampler, dataset);
      require_nonempty(dataset, sampler.axis, p);
      for (std::size_t i = 0; i < n; ++i) b.pairs.push_back(draw_member(members[draw_categorical(p, rng)], rng));
      break;
    }
    case SamplerKind::Homogeneous: {
      const auto w = sampler.active_weights();
      require_nonempty(dataset, sampler.axis, w);
      const std::size_t g = choose_homogeneous_group(w, rng);
      for (std::size_t i = 0; i < n; ++i) b.pairs.push_back(draw_member(members[g], rng));
      break;
    }
  }
  for (std::size_t idx : b.pairs) {
    b.ids.push_back(dataset[idx].identity);
    b.groups.push_back(static_cast<std::uint32_t>(group_of(dataset[idx].label, sampler.axis)));
  }
  return b;
}

void embed_batch(MiningBatch& batch, const EmbeddingNetwork& net, const Dataset& dataset) {
  const std::size_t n = batch.size(), dim = dataset.input_dim();
  RowMatrix selfie_in(n, dim), doc_in(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const SamplePair& p = dataset[batch.pairs[i]];
    std::copy(p.selfie.begin(), p.selfie.end(), selfie_in.row(i).begin());
    std::copy(p.doc.begin(), p.doc.end(), doc_in.row(i).begin());
  }
  kernels::embed_rows(net, selfie_in, batch.selfie);
  kernels::embed_rows(net, doc_in, batch.doc);
}

std::vector<std::vector<std::uint32_t>> semi_hard_candidates(const MiningBatch& batch, double margin,
                                                             Domain anchor_domain) {
  const std::size_t n = batch.size();
  const RowMatrix& anchors = anchor_domain == Domain::Selfie ? batch.selfie : batch.doc;
  const RowMatrix& others = anchor_domain == Domain::Selfie ? batch.doc : batch.selfie;
  const std::size_t other_base = anchor_domain == Domain::Selfie ? n : 0;
  std::vector<std::vector<std::uint32_t>> out(n);
  for (std::size_t a = 0; a < n; ++a) {
    const double limit = squared_distance(anchors.row(a), others.row(a)) + margin;
    for (std::size_t c = 0; c < n; ++c)
      if (batch.ids[c] != batch.ids[a] && squared_distance(anchors.row(a), others.row(c)) < limit)
        out[a].push_back(static_cast<std::uint32_t>(other_base + c));
  }
  return out;
}

std::vector<Triplet> mine_semi_hard(const MiningBatch& batch, double margin, Rng& rng) {
  const std::size_t n = batch.size();
  if (batch.selfie.rows() != n || batch.doc.rows() != n)
    throw Error("mine_semi_hard: batch embeddings have not been computed");
  std::vector<double> u_selfie(n), u_doc(n);
  for (double& u : u_selfie) u = rng.uniform();
  for (double& u : u_doc) u = rng.uniform();

  // Row i: selfie i against every doc; its transpose serves doc anchors.
  RowMatrix dist;
  kernels::cross_sqdist(batch.selfie, batch.doc, dist);
  const RowMatrix dist_t = kernels::transpose(dist);

  std::vector<std::int64_t> picked(n);
  std::vector<std::uint32_t> counts(n);
  std::vector<Triplet> out;
  out.reserve(2 * n);
  const auto N = static_cast<std::uint32_t>(n);

  kernels::pick_semi_hard(dist, batch.ids, margin, u_selfie, picked, counts);
  for (std::uint32_t i = 0; i < N; ++i)
    if (picked[i] >= 0) out.push_back({i, N + i, N + static_cast<std::uint32_t>(picked[i]), Domain::Selfie});

  kernels::pick_semi_hard(dist_t, batch.ids, margin, u_doc, picked, counts);
  for (std::uint32_t i = 0; i < N; ++i)
    if (picked[i] >= 0) out.push_back({N + i, i, static_cast<std::uint32_t>(picked[i]), Domain::Doc});
  return out;
}

bool satisfies_constraints(const MiningBatch& batch, const Triplet& t) {
  const std::size_t limit = batch.image_count();
  if (t.anchor >= limit || t.positive >= limit || t.negative >= limit) return false;
  if (batch.domain_of(t.anchor) != t.anchor_domain) return false;
  if (batch.domain_of(t.positive) == t.anchor_domain) return false;
  if (batch.domain_of(t.negative) != batch.domain_of(t.positive)) return false;
  if (batch.identity_of(t.anchor) != batch.identity_of(t.positive)) return false;
  return batch.identity_of(t.negative) != batch.identity_of(t.anchor);
}

std::vector<std::vector<Triplet>> schedule_minibatches(std::vector<Triplet> triplets, std::size_t n_train, Rng& rng) {
  if (n_train == 0) throw ConfigError("minibatch size must be positive");
  rng.shuffle(std::span<Triplet>(triplets));
  std::vector<std::vector<Triplet>> out;
  for (std::size_t start = 0; start < triplets.size(); start += n_train) {
    const std::size_t end = std::min(triplets.size(), start + n_train);
    out.emplace_back(triplets.begin() + static_cast<std::ptrdiff_t>(start),
                     triplets.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

std::vector<TripletInputs> triplet_inputs(const MiningBatch& batch, const Dataset& dataset,
                                          std::span<const Triplet> triplets) {
  auto features = [&](std::uint32_t image) -> std::span<const double> {
    const SamplePair& p = dataset[batch.pairs[batch.pair_of(image)]];
    return batch.domain_of(image) == Domain::Selfie ? std::span<const double>(p.selfie)
                                                    : std::span<const double>(p.doc);
  };
  std::vector<TripletInputs> out;
  out.reserve(triplets.size());
  for (const Triplet& t : triplets) out.push_back({features(t.anchor), features(t.positive), features(t.negative)});
  return out;
}

void write_triplets(std::ostream& out, const MiningBatch& batch, std::span<const Triplet> triplets) {
  for (const Triplet& t : triplets)
    out << batch.pairs[batch.pair_of(t.anchor)] << ' ' << batch.pairs[batch.pair_of(t.positive)] << ' '
        << batch.pairs[batch.pair_of(t.negative)] << ' ' << to_string(t.anchor_domain) << '\n';
}

}  // namespace fairmine
