#include "fairmine/datagen.hpp"

#include <cmath>
#include <numeric>

namespace fairmine {

namespace {

constexpr std::size_t kDirections = kContinentCount + 2;  // continents, male, female

bool is_far(Continent c) { return c == Continent::AF || c == Continent::AS; }

// Gram-Schmidt over seeded gaussian vectors.
std::vector<Vector> orthonormal_directions(std::size_t count, std::size_t dim, Rng& rng) {
  std::vector<Vector> out;
  while (out.size() < count) {
    Vector v(dim);
    for (double& x : v) x = rng.normal();
    for (const Vector& u : out) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += v[k] * u[k];
      for (std::size_t k = 0; k < dim; ++k) v[k] -= dot * u[k];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::array<double, kContinentCount> GeneratorConfig::default_continent_share() {
  // Published training shares; they sum to 99.9%, so renormalize.
  std::array<double, kContinentCount> s = {0.610, 0.151, 0.005, 0.047, 0.003, 0.183};
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  for (double& x : s) x /= total;
  return s;
}

std::array<std::array<double, kGenderCount>, kContinentCount> GeneratorConfig::default_gender_split() {
  return {{
      {29.0, 16.5, 15.5},
      {9.2, 5.6, 0.3},
      {0.3, 0.1, 0.1},
      {2.4, 0.7, 1.6},
      {0.1, 0.1, 0.2},
      {0.0, 0.0, 18.3},
  }};
}

void GeneratorConfig::validate() const {
  if (input_dim < kDirections)
    throw ConfigError("input_dim must be at least " + std::to_string(kDirections));
  double total = 0.0;
  for (double s : continent_share) {
    if (!(s >= 0.0)) throw ConfigError("continent shares must be nonnegative");
    total += s;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("continent composition sums to " + std::to_string(total) + ", not 1");
  const auto& tax = GroupTaxonomy::canonical();
  for (std::size_t c = 0; c < kContinentCount; ++c) {
    if (continent_share[c] == 0.0) continue;
    double w = 0.0;
    for (CountryId id : tax.countries_in(static_cast<Continent>(c))) {
      if (!(country_weight[id.value] >= 0.0)) throw ConfigError("country weights must be nonnegative");
      w += country_weight[id.value];
    }
    if (!(w > 0.0)) throw ConfigError("continent with positive share has no weighted country");
    double g = 0.0;
    for (double x : gender_split[c]) {
      if (!(x >= 0.0)) throw ConfigError("gender split must be nonnegative");
      g += x;
    }
    if (!(g > 0.0)) throw ConfigError("continent with positive share has an empty gender split");
  }
  if (!(identity_spread > 0.0)) throw ConfigError("identity_spread must be positive");
  for (double s : gender_spread_scale)
    if (!(s > 0.0)) throw ConfigError("gender spread scales must be positive");
  if (!(selfie_noise >= 0.0)) throw ConfigError("selfie_noise must be nonnegative");
  for (double s : doc_noise)
    if (!(s >= 0.0)) throw ConfigError("doc_noise must be nonnegative");
  if (!(domain_shift_strength >= 0.0)) throw ConfigError("domain_shift_strength must be nonnegative");
  if (!(duplicate_rate >= 0.0 && duplicate_rate < 1.0)) throw ConfigError("duplicate_rate must lie in [0, 1)");
  if (!(geometry.scale >= 0.0 && geometry.near_radius >= 0.0 && geometry.far_radius >= 0.0 &&
        geometry.country_spread >= 0.0 && geometry.gender_offset >= 0.0))
    throw ConfigError("group geometry parameters must be nonnegative");
}

std::vector<double> GeneratorConfig::cell_probabilities() const {
  const auto& tax = GroupTaxonomy::canonical();
  std::vector<double> cells(kCountryCount * kGenderCount, 0.0);
  for (std::size_t c = 0; c < kContinentCount; ++c) {
    const auto members = tax.countries_in(static_cast<Continent>(c));
    double wsum = 0.0;
    for (CountryId id : members) wsum += country_weight[id.value];
    double gsum = 0.0;
    for (double x : gender_split[c]) gsum += x;
    if (wsum <= 0.0 || gsum <= 0.0) continue;
    for (CountryId id : members)
      for (std::size_t g = 0; g < kGenderCount; ++g)
        cells[id.value * kGenderCount + g] =
            continent_share[c] * (country_weight[id.value] / wsum) * (gender_split[c][g] / gsum);
  }
  return cells;
}

GroupCenters build_group_geometry(const GeneratorConfig& config) {
  config.validate();
  const std::size_t dim = config.input_dim;
  const GroupGeometry& geo = config.geometry;
  Rng rng = Rng::stream(config.seed, "geometry");
  const auto dirs = orthonormal_directions(kDirections, dim, rng);

  GroupCenters out{RowMatrix(kContinentCount, dim), RowMatrix(kCountryCount, dim),
                   RowMatrix(kGenderCount, dim)};
  for (std::size_t c = 0; c < kContinentCount; ++c) {
    const double r = geo.scale * (is_far(static_cast<Continent>(c)) ? geo.far_radius : geo.near_radius);
    for (std::size_t k = 0; k < dim; ++k) out.continent.at(c, k) = r * dirs[c][k];
  }
  const auto& tax = GroupTaxonomy::canonical();
  for (std::size_t i = 0; i < kCountryCount; ++i) {
    const auto c = static_cast<std::size_t>(tax.countries()[i].continent);
    Vector offset(dim);
    double norm = 0.0;
    for (double& x : offset) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (std::size_t k = 0; k < dim; ++k)
      out.country.at(i, k) = out.continent.at(c, k) + geo.scale * geo.country_spread * offset[k] / norm;
  }
  for (std::size_t g = 0; g < 2; ++g)
    for (std::size_t k = 0; k < dim; ++k)
      out.gender.at(g, k) = geo.scale * geo.gender_offset * dirs[kContinentCount + g][k];
  return out;
}

Generator::Generator(GeneratorConfig config)
    : config_(std::move(config)), centers_(build_group_geometry(config_)), cells_(config_.cell_probabilities()) {
  const std::size_t dim = config_.input_dim;
  Rng rng = Rng::stream(config_.seed, "domain_shift");
  shift_ = RowMatrix(dim, dim);
  const double s = config_.domain_shift_strength / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) shift_.at(i, j) = (i == j ? 1.0 : 0.0) + s * rng.normal();
}

DemographicLabel Generator::draw_from_cells(std::span<const double> cells, Rng& rng) const {
  const std::size_t cell = draw_categorical(cells, rng);
  return {CountryId{static_cast<std::uint8_t>(cell / kGenderCount)}, static_cast<Gender>(cell % kGenderCount)};
}

DemographicLabel Generator::draw_label(Rng& rng) const { return draw_from_cells(cells_, rng); }

DemographicLabel Generator::draw_label_in(Axis axis, std::size_t group, Rng& rng) const {
  std::vector<double> cells(cells_.size(), 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const DemographicLabel l{CountryId{static_cast<std::uint8_t>(i / kGenderCount)},
                             static_cast<Gender>(i % kGenderCount)};
    if (group_of(l, axis) == group) cells[i] = cells_[i];
  }
  double total = 0.0;
  for (double c : cells) total += c;
  if (total <= 0.0) {
    // Group has zero share in the training composition; fall back to a uniform
    // split over its cells so evaluation pools can still be drawn.
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const DemographicLabel l{CountryId{static_cast<std::uint8_t>(i / kGenderCount)},
                               static_cast<Gender>(i % kGenderCount)};
      if (group_of(l, axis) == group) cells[i] = 1.0;
    }
  }
  return draw_from_cells(cells, rng);
}

LatentIdentity Generator::draw_identity(const DemographicLabel& label, Rng& rng) const {
  const std::size_t dim = config_.input_dim;
  const auto g = static_cast<std::size_t>(label.gender);
  const double spread = config_.identity_spread * config_.gender_spread_scale[g];
  LatentIdentity id{Vector(dim), label};
  for (std::size_t k = 0; k < dim; ++k)
    id.vector[k] = centers_.country.at(label.country.value, k) + centers_.gender.at(g, k) + spread * rng.normal();
  return id;
}

SamplePair Generator::render_pair(const LatentIdentity& identity, IdentityId id, Rng& rng) const {
  const std::size_t dim = config_.input_dim;
  if (identity.vector.size() != dim) throw DimensionError("latent identity has the wrong dimension");
  SamplePair p{id, Vector(dim), Vector(dim), identity.group};
  const double doc_noise = config_.doc_noise[static_cast<std::size_t>(identity.group.continent())];
  for (std::size_t k = 0; k < dim; ++k) p.selfie[k] = identity.vector[k] + config_.selfie_noise * rng.normal();
  for (std::size_t i = 0; i < dim; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += shift_.at(i, j) * identity.vector[j];
    p.doc[i] = s + doc_noise * rng.normal();
  }
  return p;
}

Dataset Generator::generate(std::size_t n_pairs, double duplicate_rate, std::uint64_t first_id, Rng& rng) const {
  std::vector<SamplePair> pairs;
  pairs.reserve(n_pairs);
  std::uint64_t next_id = first_id;
  while (pairs.size() < n_pairs) {
    const LatentIdentity identity = draw_identity(draw_label(rng), rng);
    const IdentityId id{next_id++};
    pairs.push_back(render_pair(identity, id, rng));
    if (pairs.size() < n_pairs && rng.uniform() < duplicate_rate) pairs.push_back(render_pair(identity, id, rng));
  }
  return Dataset(config_.input_dim, std::move(pairs));
}

Dataset Generator::generate_pool(Axis axis, std::size_t group, std::size_t n, std::uint64_t first_id,
                                 Rng& rng) const {
  if (group >= group_count(axis)) throw ConfigError("pool group index out of range");
  std::vector<SamplePair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LatentIdentity identity = draw_identity(draw_label_in(axis, group, rng), rng);
    pairs.push_back(render_pair(identity, IdentityId{first_id + i}, rng));
  }
  return Dataset(config_.input_dim, std::move(pairs));
}

Dataset generate_dataset(const GeneratorConfig& config) {
  config.validate();
  Generator gen(config);
  Rng rng = Rng::stream(config.seed, "pairs");
  return gen.generate(config.n_pairs, config.duplicate_rate, 0, rng);
}

}  // namespace fairmine
