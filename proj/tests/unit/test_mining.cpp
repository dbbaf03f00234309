#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fairmine/datagen.hpp"
#include "fairmine/mining.hpp"
#include "support/oracles.hpp"

using namespace fairmine;

namespace {

// 2-D batch with hand-placed embeddings.
MiningBatch hand_batch(const std::vector<std::array<double, 2>>& s, const std::vector<std::array<double, 2>>& d,
                       std::vector<std::uint64_t> ids) {
  MiningBatch b;
  b.selfie = RowMatrix(s.size(), 2);
  b.doc = RowMatrix(d.size(), 2);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto es = normalize(Vector{s[i][0], s[i][1]});
    const auto ed = normalize(Vector{d[i][0], d[i][1]});
    std::copy(es.values().begin(), es.values().end(), b.selfie.row(i).begin());
    std::copy(ed.values().begin(), ed.values().end(), b.doc.row(i).begin());
    b.pairs.push_back(i);
    b.ids.push_back(IdentityId{ids[i]});
    b.groups.push_back(0);
  }
  return b;
}

Dataset small_dataset(std::size_t n, std::uint64_t seed) {
  GeneratorConfig c;
  c.seed = seed;
  c.n_pairs = n;
  return generate_dataset(c);
}

}  // namespace

TEST_CASE("hand-placed batch: candidate sets match enumeration") {
  // Three identities at 0, 100 and 200 degrees; docs slightly rotated.
  auto dir = [](double deg) {
    const double r = deg * 3.14159265358979323846 / 180.0;
    return std::array<double, 2>{std::cos(r), std::sin(r)};
  };
  auto b = hand_batch({dir(0), dir(100), dir(200)}, {dir(20), dir(110), dir(170)}, {1, 2, 3});
  for (Domain dom : {Domain::Selfie, Domain::Doc}) {
    const auto got = semi_hard_candidates(b, 0.6, dom);
    for (std::size_t a = 0; a < 3; ++a) CHECK(got[a] == oracle::candidates(b, a, dom, 0.6));
  }
  // Selfie anchor 0 at 0 deg, positive doc at 20 deg: D2_ap = 2 - 2cos20 = 0.1206; no doc of
  // another identity lies within sqrt(0.7206) (~50 deg), so the set is empty.
  CHECK(semi_hard_candidates(b, 0.6, Domain::Selfie)[0].empty());
  // Doc anchor 2 at 170 deg, its selfie at 200: D2_ap = 2 - 2cos30 = 0.268; selfie 1 at 100 deg
  // is 70 deg away (D2 = 1.316) and stays out; margin 1.1 brings it in.
  CHECK(semi_hard_candidates(b, 1.1, Domain::Doc)[2] == std::vector<std::uint32_t>{1});
}

TEST_CASE("maximally separated identities yield no triplets") {
  auto b = hand_batch({{1, 0}, {-1, 0}}, {{1, 0}, {-1, 0}}, {1, 2});
  Rng rng(1);
  CHECK(mine_semi_hard(b, 0.6, rng).empty());
}

TEST_CASE("candidate sets equal brute force on random batches") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(120);
    const auto b = oracle::batch(n, 1 + rng.below(6), 0.5, rng);
    const double margin = 0.1 + rng.uniform();
    for (Domain dom : {Domain::Selfie, Domain::Doc}) {
      const auto got = semi_hard_candidates(b, margin, dom);
      for (std::size_t a = 0; a < n; ++a) REQUIRE(got[a] == oracle::candidates(b, a, dom, margin));
    }
  }
}

TEST_CASE("mined triplets draw negatives from the candidate sets") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(100);
    const auto b = oracle::batch(n, 3, 0.6, rng);
    Rng m(trial);
    const auto triplets = mine_semi_hard(b, 0.6, m);
    const auto cs = semi_hard_candidates(b, 0.6, Domain::Selfie), cd = semi_hard_candidates(b, 0.6, Domain::Doc);
    std::size_t nonempty = 0;
    for (std::size_t a = 0; a < n; ++a) nonempty += !cs[a].empty() + !cd[a].empty();
    CHECK(triplets.size() == nonempty);
    CHECK(triplets.size() <= 2 * n);
    for (const Triplet& t : triplets) {
      CHECK(satisfies_constraints(b, t));
      const std::size_t pair = b.pair_of(t.anchor);
      const auto& set = t.anchor_domain == Domain::Selfie ? cs[pair] : cd[pair];
      CHECK(std::binary_search(set.begin(), set.end(), t.negative));
    }
    Rng again(trial);
    CHECK(mine_semi_hard(b, 0.6, again) == triplets);
  }
}

TEST_CASE("every candidate set nonempty gives exactly 2N triplets") {
  Rng rng(4);
  const auto b = oracle::batch(50, 2, 0.0, rng);  // genuine distance 0, margin 4 admits everything
  Rng m(1);
  const auto t = mine_semi_hard(b, 4.5, m);
  CHECK(t.size() == 100);
}

TEST_CASE("negatives never share the anchor identity with duplicates present") {
  Rng rng(5);
  // Every identity appears twice.
  auto b = oracle::batch(80, 4, 0.8, rng);
  for (std::size_t i = 0; i < 80; ++i) b.ids[i] = IdentityId{i / 2};
  Rng m(2);
  for (const Triplet& t : mine_semi_hard(b, 2.0, m)) CHECK(b.identity_of(t.negative) != b.identity_of(t.anchor));
}

TEST_CASE("assemble_batch draws from the sampler distribution") {
  const auto ds = small_dataset(3000, 1);
  Rng rng(6);
  SUBCASE("single group") {
    std::vector<SamplePair> only;
    for (const auto& p : ds.pairs())
      if (p.label.continent() == Continent::EU) only.push_back(p);
    const Dataset eu(ds.input_dim(), only);
    const auto b = assemble_batch(eu, SamplerSpec::natural(), 200, rng);
    for (auto g : b.groups) CHECK(g == static_cast<std::uint32_t>(Continent::EU));
  }
  SUBCASE("homogeneous") {
    const auto b = assemble_batch(ds, SamplerSpec::homogeneous(Axis::Continent, equal_weights(Axis::Continent)), 500, rng);
    for (auto g : b.groups) CHECK(g == b.groups.front());
  }
  SUBCASE("equal weights within 4 sigma") {
    const auto b = assemble_batch(ds, SamplerSpec::fixed(Axis::Continent, equal_weights(Axis::Continent)), 6000, rng);
    std::vector<double> counts(kContinentCount, 0.0);
    for (auto g : b.groups) counts[g] += 1.0;
    const double sigma = std::sqrt(6000.0 * (1.0 / 6.0) * (5.0 / 6.0));
    for (double c : counts) CHECK(std::abs(c - 1000.0) < 4.0 * sigma);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(b.ids[i] == ds[b.pairs[i]].identity);
      CHECK(b.groups[i] == group_of(ds[b.pairs[i]].label, Axis::Continent));
    }
  }
  SUBCASE("empty weighted group is an error") {
    std::vector<SamplePair> only;
    for (const auto& p : ds.pairs())
      if (p.label.continent() == Continent::EU) only.push_back(p);
    const Dataset eu(ds.input_dim(), only);
    CHECK_THROWS_AS(assemble_batch(eu, SamplerSpec::fixed(Axis::Continent, equal_weights(Axis::Continent)), 10, rng),
                    ConfigError);
    CHECK_THROWS_AS(assemble_batch(ds, SamplerSpec::natural(), 1, rng), ConfigError);
  }
}

TEST_CASE("schedule_minibatches partitions the triplets") {
  std::vector<Triplet> t(64);
  for (std::uint32_t i = 0; i < 64; ++i) t[i] = {i, i + 1, i + 2, Domain::Selfie};
  Rng rng(7);
  const auto mbs = schedule_minibatches(t, 32, rng);
  REQUIRE(mbs.size() == 2);
  std::multiset<std::uint32_t> seen;
  for (const auto& mb : mbs) {
    CHECK(mb.size() == 32);
    for (const auto& x : mb) seen.insert(x.anchor);
  }
  CHECK(seen.size() == 64);
  CHECK(std::set<std::uint32_t>(seen.begin(), seen.end()).size() == 64);

  std::vector<Triplet> t33(t.begin(), t.begin() + 33);
  const auto m33 = schedule_minibatches(t33, 32, rng);
  REQUIRE(m33.size() == 2);
  CHECK(m33[0].size() == 32);
  CHECK(m33[1].size() == 1);

  Rng a(9), b(9);
  CHECK(schedule_minibatches(t, 10, a) == schedule_minibatches(t, 10, b));
  CHECK_THROWS_AS(schedule_minibatches(t, 0, a), ConfigError);
}

TEST_CASE("triplet inputs point at the raw views") {
  const auto ds = small_dataset(500, 2);
  Rng rng(8);
  auto b = assemble_batch(ds, SamplerSpec::natural(), 64, rng);
  Rng init(1);
  EmbeddingNetwork net(NetworkShape{}, init);
  embed_batch(b, net, ds);
  const auto triplets = mine_semi_hard(b, 0.6, rng);
  REQUIRE_FALSE(triplets.empty());
  const auto in = triplet_inputs(b, ds, triplets);
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    const auto& anchor_pair = ds[b.pairs[b.pair_of(t.anchor)]];
    const auto& expected = t.anchor_domain == Domain::Selfie ? anchor_pair.selfie : anchor_pair.doc;
    CHECK(std::equal(in[k].anchor.begin(), in[k].anchor.end(), expected.begin()));
    const auto e = net.forward(in[k].negative);
    CHECK(std::equal(e.values().begin(), e.values().end(), b.embedding(t.negative).begin()));
  }
  std::ostringstream dump;
  write_triplets(dump, b, triplets);
  const std::string text = dump.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(triplets.size()));
}
