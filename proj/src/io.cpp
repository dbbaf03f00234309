#include "fairmine/io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <sstream>

namespace fairmine {

namespace {

constexpr std::array<char, 4> kDatasetMagic = {'F', 'M', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;
constexpr std::size_t kCodeWidth = 8;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

}  // namespace

BinaryWriter::BinaryWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
}

void BinaryWriter::string(const std::string& s) {
  pod(static_cast<std::uint64_t>(s.size()));
  bytes(s.data(), s.size());
}

void BinaryWriter::close() {
  out_.close();
  if (!out_) throw Error("failed writing " + path_.string());
}

BinaryReader::BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw Error("cannot open " + path.string());
}

void BinaryReader::read(void* data, std::size_t n) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (!in_) throw FormatError(path_.string() + ": truncated file");
}

std::string BinaryReader::string() {
  const auto n = pod<std::uint64_t>();
  if (n > (1ULL << 32)) throw FormatError(path_.string() + ": implausible string length");
  std::string s(n, '\0');
  read(s.data(), n);
  return s;
}

bool BinaryReader::at_end() { return in_.peek() == std::char_traits<char>::eof(); }

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  const auto& tax = GroupTaxonomy::canonical();
  BinaryWriter w(path);
  w.bytes(kDatasetMagic.data(), kDatasetMagic.size());
  w.pod(kDatasetVersion);
  w.pod(static_cast<std::uint32_t>(dataset.input_dim()));
  w.pod(static_cast<std::uint64_t>(dataset.size()));
  w.pod(tax.hash());
  for (const SamplePair& p : dataset.pairs()) {
    w.pod(p.identity.value);
    std::array<char, kCodeWidth> code{};
    const auto c = tax.group(p.label.country).code;
    std::memcpy(code.data(), c.data(), c.size());
    w.bytes(code.data(), code.size());
    w.pod(static_cast<std::uint8_t>(p.label.gender));
    w.doubles(p.selfie);
    w.doubles(p.doc);
  }
  w.close();
}

Dataset read_dataset(const std::filesystem::path& path) {
  const auto& tax = GroupTaxonomy::canonical();
  BinaryReader r(path);
  std::array<char, 4> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kDatasetMagic) throw FormatError(path.string() + ": not a dataset file");
  if (const auto v = r.pod<std::uint32_t>(); v != kDatasetVersion)
    throw FormatError(path.string() + ": unsupported dataset version " + std::to_string(v));
  const auto dim = r.pod<std::uint32_t>();
  const auto n = r.pod<std::uint64_t>();
  if (r.pod<std::uint64_t>() != tax.hash())
    throw FormatError(path.string() + ": dataset was written with a different group taxonomy");
  std::vector<SamplePair> pairs(n);
  for (auto& p : pairs) {
    p.identity.value = r.pod<std::uint64_t>();
    std::array<char, kCodeWidth + 1> code{};
    r.read(code.data(), kCodeWidth);
    p.label.country = tax.country(code.data());
    const auto g = r.pod<std::uint8_t>();
    if (g >= kGenderCount) throw FormatError(path.string() + ": bad gender code");
    p.label.gender = static_cast<Gender>(g);
    p.selfie.resize(dim);
    p.doc.resize(dim);
    r.doubles(p.selfie);
    r.doubles(p.doc);
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after the last record");
  return Dataset(dim, std::move(pairs));
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_embeddings(const std::filesystem::path& path, const std::vector<EmbeddingRow>& rows,
                      const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::size_t dim = rows.empty() ? 0 : rows.front().values.size();
  out << "# config_hash: " << config_hash << '\n';
  out << "identity_id,country,gender,domain";
  for (std::size_t k = 0; k < dim; ++k) out << ",e" << k;
  out << '\n';
  const auto& tax = GroupTaxonomy::canonical();
  for (const EmbeddingRow& r : rows) {
    if (r.values.size() != dim) throw DimensionError("embedding rows differ in dimension");
    out << r.identity.value << ',' << tax.group(r.country).code << ',' << to_string(r.gender) << ','
        << to_string(r.domain);
    for (double v : r.values) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<EmbeddingRow> read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  const auto& tax = GroupTaxonomy::canonical();
  std::string line;
  std::vector<EmbeddingRow> rows;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (columns == 0) {
      if (f.size() < 4 || f[0] != "identity_id") throw FormatError(path.string() + ": missing header");
      columns = f.size();
      continue;
    }
    if (f.size() != columns) throw FormatError(path.string() + ": ragged row");
    EmbeddingRow r;
    std::uint64_t id = 0;
    const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
    if (res.ec != std::errc()) throw FormatError(path.string() + ": bad identity id");
    r.identity = IdentityId{id};
    r.country = tax.country(f[1]);
    r.gender = parse_gender(f[2]);
    if (f[3] == "selfie")
      r.domain = Domain::Selfie;
    else if (f[3] == "doc")
      r.domain = Domain::Doc;
    else
      throw FormatError(path.string() + ": bad domain '" + f[3] + "'");
    for (std::size_t k = 4; k < f.size(); ++k) r.values.push_back(parse_double(f[k]));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace fairmine
