#pragma once

#include <array>
#include <cstdint>

#include "fairmine/core.hpp"
#include "fairmine/random.hpp"

namespace fairmine {

// Placement of latent group centers. Continent centers lie on mutually
// orthonormal directions, so the distance between two continents is
// scale * sqrt(r_i^2 + r_j^2). EU, AM, OC and UN use near_radius; AF and AS
// use far_radius.
struct GroupGeometry {
  double scale = 1.0;
  double near_radius = 1.0;
  double far_radius = 6.0;
  double country_spread = 0.5;
  double gender_offset = 1.0;
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t input_dim = 32;
  std::size_t n_pairs = 50000;

  /// Continent shares, indexed by Continent. Default: the reference training composition.
  std::array<double, kContinentCount> continent_share = default_continent_share();
  /// Relative weight of each country inside its continent.
  std::array<double, kCountryCount> country_weight = filled<kCountryCount>(1.0);
  /// Male/female/unknown split inside each continent.
  std::array<std::array<double, kGenderCount>, kContinentCount> gender_split = default_gender_split();

  double identity_spread = 1.0;
  /// Multiplies identity_spread per gender; < 1 makes that gender's identities more compact.
  std::array<double, kGenderCount> gender_spread_scale = filled<kGenderCount>(1.0);
  double selfie_noise = 0.6;
  std::array<double, kContinentCount> doc_noise = {0.6, 0.6, 0.9, 0.9, 0.6, 0.6};
  double domain_shift_strength = 0.3;
  double duplicate_rate = 0.02;
  GroupGeometry geometry;

  void validate() const;
  /// Probability of each (country, gender) cell, index country * 3 + gender.
  std::vector<double> cell_probabilities() const;

  static std::array<double, kContinentCount> default_continent_share();
  static std::array<std::array<double, kGenderCount>, kContinentCount> default_gender_split();

  template <std::size_t N>
  static std::array<double, N> filled(double v) {
    std::array<double, N> a;
    a.fill(v);
    return a;
  }
};

struct GroupCenters {
  RowMatrix continent;  // kContinentCount x input_dim
  RowMatrix country;    // kCountryCount x input_dim
  RowMatrix gender;     // kGenderCount x input_dim; unknown is the zero offset
};

GroupCenters build_group_geometry(const GeneratorConfig& config);

struct LatentIdentity {
  Vector vector;
  DemographicLabel group;
};

class Generator {
 public:
  explicit Generator(GeneratorConfig config);

  const GeneratorConfig& config() const { return config_; }
  const GroupCenters& centers() const { return centers_; }
  /// Linear map applied to the latent vector of the document view.
  const RowMatrix& domain_shift() const { return shift_; }

  DemographicLabel draw_label(Rng& rng) const;
  /// Label drawn from the composition conditioned on one group of an axis.
  DemographicLabel draw_label_in(Axis axis, std::size_t group, Rng& rng) const;
  LatentIdentity draw_identity(const DemographicLabel& label, Rng& rng) const;
  SamplePair render_pair(const LatentIdentity& identity, IdentityId id, Rng& rng) const;

  /// n_pairs pairs; identity ids start at first_id.
  Dataset generate(std::size_t n_pairs, double duplicate_rate, std::uint64_t first_id, Rng& rng) const;
  /// n pairs with distinct identities, all from one group.
  Dataset generate_pool(Axis axis, std::size_t group, std::size_t n, std::uint64_t first_id,
                        Rng& rng) const;

 private:
  DemographicLabel draw_from_cells(std::span<const double> cells, Rng& rng) const;

  GeneratorConfig config_;
  GroupCenters centers_;
  RowMatrix shift_;
  std::vector<double> cells_;
};

/// Dataset of config.n_pairs pairs drawn from the "pairs" stream of config.seed.
Dataset generate_dataset(const GeneratorConfig& config);

}  // namespace fairmine
