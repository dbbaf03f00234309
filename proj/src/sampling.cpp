#include "fairmine/sampling.hpp"

#include <algorithm>

namespace fairmine {

std::string_view to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::Natural:
      return "natural";
    case SamplerKind::FixedWeights:
      return "fixed";
    case SamplerKind::DynamicWeights:
      return "dynamic";
    case SamplerKind::Homogeneous:
      return "homogeneous";
  }
  return "?";
}

SamplerKind parse_sampler_kind(std::string_view name) {
  if (name == "natural") return SamplerKind::Natural;
  if (name == "fixed") return SamplerKind::FixedWeights;
  if (name == "dynamic") return SamplerKind::DynamicWeights;
  if (name == "homogeneous") return SamplerKind::Homogeneous;
  throw ConfigError("unknown sampler '" + std::string(name) + "'");
}

DynamicState DynamicState::uniform(std::size_t groups, double exponent, double smoothing) {
  DynamicState s;
  s.exponent = exponent;
  s.smoothing = smoothing;
  s.weights.assign(groups, 1.0 / static_cast<double>(groups));
  return s;
}

void DynamicState::validate() const {
  if (!(exponent > 0.0)) throw ConfigError("dynamic exponent must be positive");
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw ConfigError("dynamic smoothing must lie in (0, 1]");
  for (double w : weights)
    if (!(w > 0.0)) throw ConfigError("dynamic weights must be strictly positive");
}

std::span<const double> SamplerSpec::active_weights() const {
  if (kind == SamplerKind::Natural) return {};
  if (uses_dynamic()) return state.weights;
  return weights;
}

void SamplerSpec::validate() const {
  if (kind == SamplerKind::Natural) return;
  const auto w = active_weights();
  if (w.size() != group_count(axis))
    throw ConfigError("sampler needs " + std::to_string(group_count(axis)) + " weights for axis " +
                      std::string(to_string(axis)));
  bool positive = false;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("sampler weights must be finite and nonnegative");
    positive |= x > 0.0;
  }
  if (!positive) throw ConfigError("sampler needs at least one positive weight");
  if (uses_dynamic()) state.validate();
  if (!(far_floor >= 0.0 && far_floor < 1.0)) throw ConfigError("far_floor must lie in [0, 1)");
}

SamplerSpec SamplerSpec::natural(Axis axis) {
  SamplerSpec s;
  s.axis = axis;
  return s;
}

SamplerSpec SamplerSpec::fixed(Axis axis, Vector weights) {
  SamplerSpec s;
  s.kind = SamplerKind::FixedWeights;
  s.axis = axis;
  s.weights = std::move(weights);
  return s;
}

SamplerSpec SamplerSpec::dynamic_weights(Axis axis, double exponent, double smoothing) {
  SamplerSpec s;
  s.kind = SamplerKind::DynamicWeights;
  s.axis = axis;
  s.state = DynamicState::uniform(group_count(axis), exponent, smoothing);
  return s;
}

SamplerSpec SamplerSpec::homogeneous(Axis axis, Vector weights) {
  SamplerSpec s = fixed(axis, std::move(weights));
  s.kind = SamplerKind::Homogeneous;
  return s;
}

SamplerSpec SamplerSpec::homogeneous_dynamic(Axis axis, double exponent, double smoothing) {
  SamplerSpec s = dynamic_weights(axis, exponent, smoothing);
  s.kind = SamplerKind::Homogeneous;
  s.dynamic = true;
  return s;
}

Vector equal_weights(Axis axis) { return Vector(group_count(axis), 1.0); }

Vector continent_adjusted_weights() {
  Vector w(kContinentCount, 1.0);
  w[static_cast<std::size_t>(Continent::AF)] = 3.0;
  w[static_cast<std::size_t>(Continent::AS)] = 3.0;
  return w;
}

Vector country_adjusted_weights() {
  const auto& tax = GroupTaxonomy::canonical();
  Vector w(kCountryCount, 1.0);
  for (std::size_t i = 0; i < kCountryCount; ++i) {
    const auto& g = tax.countries()[i];
    const bool boosted = g.continent == Continent::AF || g.continent == Continent::AS ||
                         (g.continent == Continent::AM && g.code != "US" && g.code != "CA");
    if (boosted) w[i] = 4.0;
  }
  return w;
}

Vector probabilities(const SamplerSpec& spec, const Dataset& dataset) {
  spec.validate();
  Vector p;
  if (spec.kind == SamplerKind::Natural) {
    if (dataset.empty()) throw ConfigError("natural sampling over an empty dataset");
    for (std::size_t n : dataset.group_sizes(spec.axis)) p.push_back(static_cast<double>(n));
  } else {
    const auto w = spec.active_weights();
    p.assign(w.begin(), w.end());
  }
  double total = 0.0;
  for (double x : p) total += x;
  if (!(total > 0.0)) throw ConfigError("sampler weights are all zero");
  for (double& x : p) x /= total;
  return p;
}

Vector raw_dynamic_weights(std::span<const double> per_group_far, double exponent, double far_floor) {
  Vector w;
  w.reserve(per_group_far.size());
  for (double far : per_group_far) w.push_back(std::pow(std::max(far, far_floor), exponent));
  return w;
}

DynamicState update_dynamic_weights(const DynamicState& state, std::span<const double> per_group_far,
                                    double far_floor) {
  state.validate();
  if (per_group_far.size() != state.weights.size())
    throw DimensionError("dynamic update: FAR map and weights differ in size");
  if (!(far_floor > 0.0)) throw ConfigError("dynamic update needs a positive FAR floor");
  const Vector raw = raw_dynamic_weights(per_group_far, state.exponent, far_floor);
  DynamicState next = state;
  const double a = state.smoothing;
  // Written as w + a (raw - w) so raw == w is an exact fixed point; a == 1 copies raw.
  for (std::size_t i = 0; i < raw.size(); ++i)
    next.weights[i] = a == 1.0 ? raw[i] : state.weights[i] + a * (raw[i] - state.weights[i]);
  ++next.epoch;
  return next;
}

std::size_t choose_homogeneous_group(std::span<const double> weights, Rng& rng) {
  return draw_categorical(weights, rng);
}

}  // namespace fairmine
