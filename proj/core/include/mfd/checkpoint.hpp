#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "mfd/mlp.hpp"

namespace mfd {

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::string method = "CE";
  int epoch = 0;
  /// Numeric hyperparameters (lambda, temperature, skew, ...).
  std::map<std::string, double> hyper;

  friend bool operator==(const CheckpointMeta&, const CheckpointMeta&) = default;
};

/// Serialized network. Weights are stored as 32-bit floats, so building a
/// checkpoint rounds every parameter to float precision; once rounded, a
/// checkpoint round-trips through save/load bit-exactly.
struct ModelCheckpoint {
  MlpParams params;
  CheckpointMeta meta;
};

ModelCheckpoint make_checkpoint(const MlpParams& params, CheckpointMeta meta);

// File layout (little-endian):
//   magic "MFDCKPT\0" | u32 version | u64 header bytes | header (UTF-8 JSON:
//   layer_dims, seed, method, epoch, hyper, payload_floats) | f32 payload:
//   per layer, weight (row-major fan_in x fan_out) then bias.
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& checkpoint);
/// Throws FormatError on a bad magic, version mismatch, malformed header or
/// truncated payload; nothing is returned on failure.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace mfd
