#pragma once

#include <filesystem>

#include "mfd/data_synth.hpp"

namespace mfd {

// Binary dataset layout, all fields little-endian:
//
//   offset  size  field
//   0       8     magic "MFDDATA\0"
//   8       4     format version (u32, currently 1)
//   12      4     class count M (u32)
//   16      4     group count |A| (u32)
//   20      4     feature dimension d (u32)
//   24      8     sample count N (u64)
//   32      8     root seed (u64)
//   40      8     skew rho (f64)
//   48      ...   N rows of: d x f64 features, u32 class, u32 group
inline constexpr std::uint32_t kDatasetFormatVersion = 1;

void write_dataset(const std::filesystem::path& path, const LabeledDataset& dataset);
/// Throws FormatError on a bad magic, version, truncated payload or
/// out-of-range indices; IoError when the file cannot be opened.
LabeledDataset read_dataset(const std::filesystem::path& path);

/// CSV with header f0..f{d-1},y,a; values printed with 17 significant digits.
void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset);

}  // namespace mfd
