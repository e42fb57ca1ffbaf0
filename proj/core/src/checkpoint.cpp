#include "mfd/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "mfd/binary_io.hpp"
#include "mfd/errors.hpp"

namespace mfd {
namespace {

constexpr std::string_view kMagic{"MFDCKPT\0", 8};

}  // namespace

ModelCheckpoint make_checkpoint(const MlpParams& params, CheckpointMeta meta) {
  params.validate();
  ModelCheckpoint c{params, std::move(meta)};
  for (auto& l : c.params.layers) {
    for (double& v : l.weight.values()) v = static_cast<double>(static_cast<float>(v));
    for (double& v : l.bias.values()) v = static_cast<double>(static_cast<float>(v));
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint) {
  checkpoint.params.validate();
  nlohmann::ordered_json header;
  header["layer_dims"] = checkpoint.params.spec.layer_dims;
  header["seed"] = checkpoint.meta.seed;
  header["method"] = checkpoint.meta.method;
  header["epoch"] = checkpoint.meta.epoch;
  header["hyper"] = checkpoint.meta.hyper;
  header["payload_floats"] = checkpoint.params.parameter_count();
  const std::string text = header.dump();

  std::vector<std::uint8_t> buf;
  binary::put_bytes(buf, kMagic);
  binary::put<std::uint32_t>(buf, kCheckpointFormatVersion);
  binary::put<std::uint64_t>(buf, text.size());
  binary::put_bytes(buf, text);
  for (double v : checkpoint.params.flatten()) binary::put<float>(buf, static_cast<float>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  const std::vector<std::uint8_t> buf(std::istreambuf_iterator<char>(in), {});
  binary::Reader r(buf);

  if (r.remaining() < kMagic.size() || r.get_bytes(kMagic.size()) != kMagic) {
    throw FormatError(path.string() + ": not a checkpoint file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointFormatVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_size = r.get<std::uint64_t>();
  if (header_size > r.remaining()) throw FormatError(path.string() + ": truncated header");
  ModelCheckpoint c;
  std::size_t payload = 0;
  try {
    const auto header = nlohmann::json::parse(r.get_bytes(header_size));
    c.params.spec.layer_dims = header.at("layer_dims").get<std::vector<std::size_t>>();
    c.meta.seed = header.at("seed").get<std::uint64_t>();
    c.meta.method = header.at("method").get<std::string>();
    c.meta.epoch = header.at("epoch").get<int>();
    c.meta.hyper = header.at("hyper").get<std::map<std::string, double>>();
    payload = header.at("payload_floats").get<std::size_t>();
    c.params.spec.validate();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed checkpoint header: " + e.what());
  } catch (const ParameterError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }

  const auto& dims = c.params.spec.layer_dims;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    c.params.layers.push_back({Tensor(dims[i], dims[i + 1]), Tensor(1, dims[i + 1])});
  }
  if (payload != c.params.parameter_count() || r.remaining() != payload * sizeof(float)) {
    throw FormatError(path.string() + ": weight payload size does not match the layer spec");
  }
  std::vector<double> flat(payload);
  for (double& v : flat) v = static_cast<double>(r.get<float>());
  c.params.assign(flat);
  return c;
}

}  // namespace mfd
