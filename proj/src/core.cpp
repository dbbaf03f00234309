#include "fairmine/core.hpp"

#include <cmath>
#include <cstdio>

namespace fairmine {

namespace {

constexpr std::array<std::string_view, kContinentCount> kContinentCodes = {"EU", "AM", "AF",
                                                                           "AS", "OC", "UN"};
constexpr std::array<std::string_view, kGenderCount> kGenderCodes = {"male", "female", "unknown"};

}  // namespace

std::string_view to_string(Continent c) { return kContinentCodes[static_cast<std::size_t>(c)]; }

std::string_view to_string(Gender g) { return kGenderCodes[static_cast<std::size_t>(g)]; }

std::string_view to_string(Domain d) { return d == Domain::Selfie ? "selfie" : "doc"; }

std::string_view to_string(Axis a) {
  switch (a) {
    case Axis::Continent:
      return "continent";
    case Axis::Country:
      return "country";
    case Axis::Gender:
      return "gender";
  }
  return "?";
}

Continent parse_continent(std::string_view code) {
  for (std::size_t i = 0; i < kContinentCodes.size(); ++i)
    if (kContinentCodes[i] == code) return static_cast<Continent>(i);
  throw ConfigError("unknown continent code '" + std::string(code) + "'");
}

Gender parse_gender(std::string_view code) {
  for (std::size_t i = 0; i < kGenderCodes.size(); ++i)
    if (kGenderCodes[i] == code) return static_cast<Gender>(i);
  throw ConfigError("unknown gender '" + std::string(code) + "'");
}

Axis parse_axis(std::string_view name) {
  if (name == "continent") return Axis::Continent;
  if (name == "country") return Axis::Country;
  if (name == "gender") return Axis::Gender;
  throw ConfigError("unknown grouping axis '" + std::string(name) + "'");
}

GroupTaxonomy::GroupTaxonomy()
    : countries_{{
          {"FR", "France", Continent::EU},
          {"GB", "Great Britain", Continent::EU},
          {"IE", "Ireland", Continent::EU},
          {"IT", "Italy", Continent::EU},
          {"LV", "Latvia", Continent::EU},
          {"LT", "Lithuania", Continent::EU},
          {"PL", "Poland", Continent::EU},
          {"PT", "Portugal", Continent::EU},
          {"RO", "Roumania", Continent::EU},
          {"ES", "Spain", Continent::EU},
          {"EU_REM", "Europe (rem)", Continent::EU},
          {"BR", "Brazil", Continent::AM},
          {"CA", "Canada", Continent::AM},
          {"CO", "Colombia", Continent::AM},
          {"US", "USA", Continent::AM},
          {"VE", "Venezuela", Continent::AM},
          {"AM_REM", "Americas (rem)", Continent::AM},
          {"NG", "Nigeria", Continent::AF},
          {"NAF", "North Africa", Continent::AF},
          {"ZA", "South Africa", Continent::AF},
          {"AF_REM", "Africa (rem)", Continent::AF},
          {"CN", "China", Continent::AS},
          {"IN", "India", Continent::AS},
          {"ID", "Indonesia", Continent::AS},
          {"MY", "Malaysia", Continent::AS},
          {"SG", "Singapore", Continent::AS},
          {"TH", "Thailand", Continent::AS},
          {"AS_REM", "Asia (rem)", Continent::AS},
          {"OC", "Oceania", Continent::OC},
          {"UNK", "Unknown", Continent::UN},
      }} {}

const GroupTaxonomy& GroupTaxonomy::canonical() {
  static const GroupTaxonomy taxonomy;
  return taxonomy;
}

CountryId GroupTaxonomy::country(std::string_view code) const {
  for (std::size_t i = 0; i < countries_.size(); ++i)
    if (countries_[i].code == code) return CountryId{static_cast<std::uint8_t>(i)};
  throw ConfigError("unknown country code '" + std::string(code) + "'");
}

const CountryGroup& GroupTaxonomy::group(CountryId id) const {
  if (id.value >= countries_.size())
    throw ConfigError("country index " + std::to_string(id.value) + " out of range");
  return countries_[id.value];
}

std::vector<CountryId> GroupTaxonomy::countries_in(Continent c) const {
  std::vector<CountryId> out;
  for (std::size_t i = 0; i < countries_.size(); ++i)
    if (countries_[i].continent == c) out.push_back(CountryId{static_cast<std::uint8_t>(i)});
  return out;
}

std::uint64_t GroupTaxonomy::hash() const {
  std::string canon;
  for (const auto& g : countries_) {
    canon += g.code;
    canon += '=';
    canon += to_string(g.continent);
    canon += ';';
  }
  return fnv1a(canon);
}

std::size_t group_count(Axis axis) {
  switch (axis) {
    case Axis::Continent:
      return kContinentCount;
    case Axis::Country:
      return kCountryCount;
    case Axis::Gender:
      return kGenderCount;
  }
  return 0;
}

std::size_t group_of(const DemographicLabel& label, Axis axis) {
  switch (axis) {
    case Axis::Continent:
      return static_cast<std::size_t>(label.continent());
    case Axis::Country:
      return label.country.value;
    case Axis::Gender:
      return static_cast<std::size_t>(label.gender);
  }
  return 0;
}

std::string group_name(Axis axis, std::size_t group) {
  switch (axis) {
    case Axis::Continent:
      return std::string(to_string(static_cast<Continent>(group)));
    case Axis::Country:
      return std::string(
          GroupTaxonomy::canonical().group(CountryId{static_cast<std::uint8_t>(group)}).code);
    case Axis::Gender:
      return std::string(to_string(static_cast<Gender>(group)));
  }
  return {};
}

std::size_t parse_group(Axis axis, std::string_view code) {
  switch (axis) {
    case Axis::Continent:
      return static_cast<std::size_t>(parse_continent(code));
    case Axis::Country:
      return GroupTaxonomy::canonical().country(code).value;
    case Axis::Gender:
      return static_cast<std::size_t>(parse_gender(code));
  }
  return 0;
}

Embedding Embedding::from_unit(Vector values) {
  double sq = 0.0;
  for (double x : values) sq += x * x;
  if (std::abs(std::sqrt(sq) - 1.0) > 1e-6)
    throw NormalizationError("embedding is not unit norm (norm " + std::to_string(std::sqrt(sq)) +
                             ")");
  return Embedding(std::move(values));
}

Embedding normalize(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw NormalizationError("cannot normalize a vector with norm " + std::to_string(norm));
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return Embedding(std::move(out));
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("distance between vectors of dimension " + std::to_string(a.size()) +
                         " and " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double squared_distance(const Embedding& a, const Embedding& b) {
  return squared_distance(a.values(), b.values());
}

Dataset::Dataset(std::size_t input_dim, std::vector<SamplePair> pairs)
    : input_dim_(input_dim), pairs_(std::move(pairs)) {
  for (std::size_t a = 0; a < index_.size(); ++a)
    index_[a].assign(group_count(static_cast<Axis>(a)), {});
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    if (p.selfie.size() != input_dim_ || p.doc.size() != input_dim_)
      throw DimensionError("pair " + std::to_string(i) + " does not have input dimension " +
                           std::to_string(input_dim_));
    for (std::size_t a = 0; a < index_.size(); ++a)
      index_[a][group_of(p.label, static_cast<Axis>(a))].push_back(i);
  }
}

std::vector<std::size_t> Dataset::group_sizes(Axis axis) const {
  std::vector<std::size_t> out;
  for (const auto& m : members(axis)) out.push_back(m.size());
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace fairmine
