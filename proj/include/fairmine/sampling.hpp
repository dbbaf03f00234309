#pragma once

#include <cmath>
#include <span>
#include <string_view>

#include "fairmine/core.hpp"
#include "fairmine/random.hpp"

namespace fairmine {

enum class SamplerKind : std::uint8_t { Natural, FixedWeights, DynamicWeights, Homogeneous };

std::string_view to_string(SamplerKind k);
SamplerKind parse_sampler_kind(std::string_view name);

/// Exponentially averaged FAR-driven weights.
struct DynamicState {
  double exponent = std::log10(4.0);
  double smoothing = 0.2;
  Vector weights;  // w(t), one per group, strictly positive
  std::uint64_t epoch = 0;

  static DynamicState uniform(std::size_t groups, double exponent = std::log10(4.0), double smoothing = 0.2);
  void validate() const;

  friend bool operator==(const DynamicState&, const DynamicState&) = default;
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::Natural;
  Axis axis = Axis::Continent;
  /// Fixed weights; also the group weights of Homogeneous when not dynamic.
  Vector weights;
  /// Homogeneous only: choose the group from dynamic weights.
  bool dynamic = false;
  DynamicState state;
  /// Smallest FAR fed to the power law. Zero means 1 / validation comparisons.
  double far_floor = 0.0;

  bool uses_dynamic() const {
    return kind == SamplerKind::DynamicWeights || (kind == SamplerKind::Homogeneous && dynamic);
  }
  /// Weights currently in force; empty for Natural.
  std::span<const double> active_weights() const;
  void validate() const;

  static SamplerSpec natural(Axis axis = Axis::Continent);
  static SamplerSpec fixed(Axis axis, Vector weights);
  static SamplerSpec dynamic_weights(Axis axis, double exponent = std::log10(4.0), double smoothing = 0.2);
  static SamplerSpec homogeneous(Axis axis, Vector weights);
  static SamplerSpec homogeneous_dynamic(Axis axis, double exponent = std::log10(4.0), double smoothing = 0.2);

  friend bool operator==(const SamplerSpec&, const SamplerSpec&) = default;
};

Vector equal_weights(Axis axis);
/// EU, AM, OC, UN weight 1; AF, AS weight 3.
Vector continent_adjusted_weights();
/// Countries of Africa, Asia and America except USA and Canada weight 4; others 1.
Vector country_adjusted_weights();

/// Group sampling probabilities; Natural uses the dataset's group frequencies.
Vector probabilities(const SamplerSpec& spec, const Dataset& dataset);

/// max(FAR_i, far_floor)^exponent per group.
Vector raw_dynamic_weights(std::span<const double> per_group_far, double exponent, double far_floor);

/// w(t) = smoothing * raw(t) + (1 - smoothing) * w(t-1); epoch advances by one.
DynamicState update_dynamic_weights(const DynamicState& state, std::span<const double> per_group_far,
                                    double far_floor);

std::size_t choose_homogeneous_group(std::span<const double> weights, Rng& rng);

}  // namespace fairmine
