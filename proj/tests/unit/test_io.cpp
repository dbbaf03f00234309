#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fairmine/datagen.hpp"
#include "fairmine/io.hpp"
#include "support/oracles.hpp"

using namespace fairmine;

namespace {

std::filesystem::path temp(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("dataset file round trip is lossless") {
  GeneratorConfig c;
  c.n_pairs = 700;
  const auto ds = generate_dataset(c);
  const auto path = temp("fairmine_test.fmds");
  write_dataset(path, ds);
  CHECK(read_dataset(path) == ds);

  // Truncation and bad magic are format errors.
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  CHECK_THROWS_AS(read_dataset(path), FormatError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "JUNKJUNKJUNK";
  }
  CHECK_THROWS_AS(read_dataset(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("embedding CSV round trip keeps exact values") {
  Rng rng(1);
  const auto& tax = GroupTaxonomy::canonical();
  std::vector<EmbeddingRow> rows;
  const auto m = oracle::unit_rows(50, 7, rng);
  for (std::size_t i = 0; i < 50; ++i)
    rows.push_back({IdentityId{i * 31}, CountryId{static_cast<std::uint8_t>(i % tax.countries().size())},
                    static_cast<Gender>(i % 3), i % 2 ? Domain::Doc : Domain::Selfie,
                    Vector(m.row(i).begin(), m.row(i).end())});
  const auto path = temp("fairmine_test_emb.csv");
  write_embeddings(path, rows, "00ff");
  CHECK(read_embeddings(path) == rows);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "# config_hash: 00ff");
  std::filesystem::remove(path);
}

TEST_CASE("format_double is round-trip exact") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.normal() * 5);
    CHECK(std::stod(format_double(v)) == v);
  }
}
