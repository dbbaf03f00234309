#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fairmine/core.hpp"
#include "fairmine/model.hpp"
#include "fairmine/random.hpp"
#include "fairmine/sampling.hpp"

namespace fairmine {

// Indices refer to the batch's flattened image list: image i < N is the
// selfie of batch pair i, image N + i is its document.
struct Triplet {
  std::uint32_t anchor = 0;
  std::uint32_t positive = 0;
  std::uint32_t negative = 0;
  Domain anchor_domain = Domain::Selfie;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

class MiningBatch {
 public:
  std::vector<std::size_t> pairs;  // dataset indices, with repeats
  std::vector<IdentityId> ids;
  std::vector<std::uint32_t> groups;  // group along the sampler axis
  RowMatrix selfie;                   // N x d embeddings, filled by embed_batch
  RowMatrix doc;

  std::size_t size() const { return pairs.size(); }
  std::size_t image_count() const { return 2 * pairs.size(); }
  std::size_t image_index(std::size_t pair, Domain d) const { return d == Domain::Selfie ? pair : size() + pair; }
  std::size_t pair_of(std::size_t image) const { return image < size() ? image : image - size(); }
  Domain domain_of(std::size_t image) const { return image < size() ? Domain::Selfie : Domain::Doc; }
  IdentityId identity_of(std::size_t image) const { return ids[pair_of(image)]; }
  std::span<const double> embedding(std::size_t image) const {
    return image < size() ? selfie.row(image) : doc.row(image - size());
  }
};

/// N pairs drawn with replacement: group from the sampler distribution, then
/// uniform within the group. Homogeneous samplers draw one group per batch.
MiningBatch assemble_batch(const Dataset& dataset, const SamplerSpec& sampler, std::size_t n, Rng& rng);

/// Embeds both views of every batch pair with a frozen network snapshot.
void embed_batch(MiningBatch& batch, const EmbeddingNetwork& net, const Dataset& dataset);

/// Candidate negatives (image indices, ascending) for every pair when the
/// anchor is taken from anchor_domain: same domain as the positive, different
/// identity, and D2_ap + margin > D2_ac.
std::vector<std::vector<std::uint32_t>> semi_hard_candidates(const MiningBatch& batch, double margin,
                                                             Domain anchor_domain);

/// Up to two triplets per pair, selfie-anchored ones first. Exactly 2N
/// uniforms are drawn from rng regardless of how many candidate sets are empty.
std::vector<Triplet> mine_semi_hard(const MiningBatch& batch, double margin, Rng& rng);

/// Valid iff anchor/positive share the identity, the negative does not, and
/// positive/negative share the domain opposite to the anchor.
bool satisfies_constraints(const MiningBatch& batch, const Triplet& t);

/// Shuffles once and cuts into chunks of n_train; the last chunk may be short.
std::vector<std::vector<Triplet>> schedule_minibatches(std::vector<Triplet> triplets, std::size_t n_train, Rng& rng);

/// Raw feature views for each triplet role; spans point into the dataset.
std::vector<TripletInputs> triplet_inputs(const MiningBatch& batch, const Dataset& dataset,
                                          std::span<const Triplet> triplets);

/// Debug dump: one "anchor positive negative domain" line per triplet.
void write_triplets(std::ostream& out, const MiningBatch& batch, std::span<const Triplet> triplets);

}  // namespace fairmine
