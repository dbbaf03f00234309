#include "fairmine/checkpoint.hpp"

#include <array>

#include "fairmine/io.hpp"

namespace fairmine {

namespace {

constexpr std::array<char, 4> kMagic = {'F', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

EmbeddingNetwork Checkpoint::network() const {
  auto net = EmbeddingNetwork::zeros(shape);
  if (net.parameters().size() != parameters.size())
    throw FormatError("checkpoint parameter count does not match its network shape");
  std::copy(parameters.begin(), parameters.end(), net.parameters().begin());
  return net;
}

Checkpoint make_checkpoint(std::uint64_t config_hash, const EmbeddingNetwork& net,
                           const OptimizerState& optimizer, std::string run_state) {
  return {config_hash, net.shape(), Vector(net.parameters().begin(), net.parameters().end()), optimizer,
          std::move(run_state)};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  auto tmp = path;
  tmp += ".tmp";
  {
    BinaryWriter w(tmp);
    w.bytes(kMagic.data(), kMagic.size());
    w.pod(kVersion);
    w.pod(ck.config_hash);
    w.pod(ck.shape.hash());
    w.pod(static_cast<std::uint32_t>(ck.shape.input_dim));
    w.pod(static_cast<std::uint32_t>(ck.shape.widths.size()));
    for (std::size_t width : ck.shape.widths) w.pod(static_cast<std::uint32_t>(width));
    w.pod(static_cast<std::uint8_t>(ck.shape.activation));
    w.pod(static_cast<std::uint64_t>(ck.parameters.size()));
    w.doubles(ck.parameters);
    if (ck.optimizer.first_moment.size() != ck.parameters.size() ||
        ck.optimizer.second_moment.size() != ck.parameters.size())
      throw DimensionError("optimizer moments do not match the parameter count");
    w.doubles(ck.optimizer.first_moment);
    w.doubles(ck.optimizer.second_moment);
    w.pod(ck.optimizer.step);
    w.string(ck.run_state);
    w.close();
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  BinaryReader r(path);
  std::array<char, 4> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) throw FormatError(path.string() + ": not a checkpoint file");
  if (const auto v = r.pod<std::uint32_t>(); v != kVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(v));
  Checkpoint ck;
  ck.config_hash = r.pod<std::uint64_t>();
  const auto shape_hash = r.pod<std::uint64_t>();
  ck.shape.input_dim = r.pod<std::uint32_t>();
  ck.shape.widths.resize(r.pod<std::uint32_t>());
  for (auto& width : ck.shape.widths) width = r.pod<std::uint32_t>();
  const auto act = r.pod<std::uint8_t>();
  if (act > static_cast<std::uint8_t>(Activation::Relu)) throw FormatError(path.string() + ": bad activation");
  ck.shape.activation = static_cast<Activation>(act);
  if (ck.shape.hash() != shape_hash) throw FormatError(path.string() + ": network shape hash mismatch");
  const auto n = r.pod<std::uint64_t>();
  if (n != ck.shape.parameter_count()) throw FormatError(path.string() + ": parameter count mismatch");
  ck.parameters.resize(n);
  r.doubles(ck.parameters);
  ck.optimizer.first_moment.resize(n);
  ck.optimizer.second_moment.resize(n);
  r.doubles(ck.optimizer.first_moment);
  r.doubles(ck.optimizer.second_moment);
  ck.optimizer.step = r.pod<std::uint64_t>();
  ck.run_state = r.string();
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes");
  return ck;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_config_hash) {
  Checkpoint ck = load_checkpoint(path);
  if (ck.config_hash != expected_config_hash)
    throw ConfigError(path.string() + ": checkpoint config hash " + hex64(ck.config_hash) +
                      " does not match " + hex64(expected_config_hash));
  return ck;
}

}  // namespace fairmine
