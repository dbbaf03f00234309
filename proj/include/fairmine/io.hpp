#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fairmine/core.hpp"

namespace fairmine {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path);

  template <typename T>
  void pod(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void bytes(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void doubles(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
  void string(const std::string& s);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path);

  template <typename T>
  T pod() {
    T v{};
    read(&v, sizeof v);
    return v;
  }
  void read(void* data, std::size_t n);
  void doubles(std::span<double> v) { read(v.data(), v.size() * sizeof(double)); }
  std::string string();
  bool at_end();

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

/// Binary dataset file; layout documented in docs/formats.md.
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

struct EmbeddingRow {
  IdentityId identity;
  CountryId country;
  Gender gender = Gender::Unknown;
  Domain domain = Domain::Selfie;
  Vector values;

  friend bool operator==(const EmbeddingRow&, const EmbeddingRow&) = default;
};

/// CSV with a '# config_hash' comment line, a header, and %.17g values.
void write_embeddings(const std::filesystem::path& path, const std::vector<EmbeddingRow>& rows,
                      const std::string& config_hash);
std::vector<EmbeddingRow> read_embeddings(const std::filesystem::path& path);

/// Shortest text form that parses back to the same double.
std::string format_double(double v);

}  // namespace fairmine
