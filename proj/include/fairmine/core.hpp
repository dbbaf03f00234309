#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fairmine {

using Vector = std::vector<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when a FAR measurement cannot resolve the requested operating point.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

enum class Continent : std::uint8_t { EU, AM, AF, AS, OC, UN };
enum class Gender : std::uint8_t { Male, Female, Unknown };
enum class Domain : std::uint8_t { Selfie, Doc };
enum class Axis : std::uint8_t { Continent, Country, Gender };

inline constexpr std::size_t kContinentCount = 6;
inline constexpr std::size_t kCountryCount = 30;
inline constexpr std::size_t kGenderCount = 3;

std::string_view to_string(Continent c);
std::string_view to_string(Gender g);
std::string_view to_string(Domain d);
std::string_view to_string(Axis a);
Continent parse_continent(std::string_view code);
Gender parse_gender(std::string_view code);
Axis parse_axis(std::string_view name);

struct IdentityId {
  std::uint64_t value = 0;
  friend bool operator==(IdentityId, IdentityId) = default;
  friend auto operator<=>(IdentityId, IdentityId) = default;
};

/// Index into the canonical country table.
struct CountryId {
  std::uint8_t value = 0;
  friend bool operator==(CountryId, CountryId) = default;
};

struct CountryGroup {
  std::string_view code;
  std::string_view name;
  Continent continent;
};

// The 30 document-issuing country groups and their continents. Remainder
// buckets ("EU_REM" etc.) are atomic groups.
class GroupTaxonomy {
 public:
  static const GroupTaxonomy& canonical();

  std::span<const CountryGroup> countries() const { return countries_; }
  CountryId country(std::string_view code) const;
  const CountryGroup& group(CountryId id) const;
  Continent continent_of(CountryId id) const { return group(id).continent; }
  Continent continent_of(std::string_view code) const { return continent_of(country(code)); }
  std::vector<CountryId> countries_in(Continent c) const;
  std::uint64_t hash() const;

 private:
  GroupTaxonomy();
  std::array<CountryGroup, kCountryCount> countries_;
};

struct DemographicLabel {
  CountryId country;
  Gender gender = Gender::Unknown;

  Continent continent() const { return GroupTaxonomy::canonical().continent_of(country); }
  friend bool operator==(const DemographicLabel&, const DemographicLabel&) = default;
};

/// Number of groups along an axis and the group index of a label.
std::size_t group_count(Axis axis);
std::size_t group_of(const DemographicLabel& label, Axis axis);
std::string group_name(Axis axis, std::size_t group);
std::size_t parse_group(Axis axis, std::string_view code);

// Unit-norm vector. Only constructible through normalize() or from_unit().
class Embedding {
 public:
  static Embedding from_unit(Vector values);

  std::span<const double> values() const { return values_; }
  std::size_t dim() const { return values_.size(); }

 private:
  explicit Embedding(Vector values) : values_(std::move(values)) {}
  Vector values_;
  friend Embedding normalize(std::span<const double> v);
};

Embedding normalize(std::span<const double> v);

/// ||a - b||^2 summed in index order.
double squared_distance(std::span<const double> a, std::span<const double> b);
double squared_distance(const Embedding& a, const Embedding& b);

// Dense row-major matrix; one row per vector.
class RowMatrix {
 public:
  RowMatrix() = default;
  RowMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  friend bool operator==(const RowMatrix&, const RowMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SamplePair {
  IdentityId identity;
  Vector selfie;
  Vector doc;
  DemographicLabel label;

  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t input_dim, std::vector<SamplePair> pairs);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const SamplePair& operator[](std::size_t i) const { return pairs_[i]; }
  std::span<const SamplePair> pairs() const { return pairs_; }

  /// members(axis)[g] lists the pair indices in group g, ascending.
  const std::vector<std::vector<std::size_t>>& members(Axis axis) const {
    return index_[static_cast<std::size_t>(axis)];
  }
  std::vector<std::size_t> group_sizes(Axis axis) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.input_dim_ == b.input_dim_ && a.pairs_ == b.pairs_;
  }

 private:
  std::size_t input_dim_ = 0;
  std::vector<SamplePair> pairs_;
  std::array<std::vector<std::vector<std::size_t>>, 3> index_;
};

/// FNV-1a 64-bit.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace fairmine
