#include "mfd/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

#include "mfd/binary_io.hpp"
#include "mfd/errors.hpp"

namespace mfd {
namespace {

constexpr std::string_view kMagic{"MFDDATA\0", 8};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const LabeledDataset& dataset) {
  dataset.validate();
  const std::size_t d = dataset.dim();
  std::vector<std::uint8_t> buf;
  buf.reserve(48 + dataset.size() * (d * 8 + 8));
  binary::put_bytes(buf, kMagic);
  binary::put<std::uint32_t>(buf, kDatasetFormatVersion);
  binary::put<std::uint32_t>(buf, static_cast<std::uint32_t>(dataset.num_classes));
  binary::put<std::uint32_t>(buf, static_cast<std::uint32_t>(dataset.num_groups));
  binary::put<std::uint32_t>(buf, static_cast<std::uint32_t>(d));
  binary::put<std::uint64_t>(buf, dataset.size());
  binary::put<std::uint64_t>(buf, dataset.seed);
  binary::put<double>(buf, dataset.skew);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.features.row(i)) binary::put<double>(buf, v);
    binary::put<std::uint32_t>(buf, static_cast<std::uint32_t>(dataset.labels[i]));
    binary::put<std::uint32_t>(buf, static_cast<std::uint32_t>(dataset.groups[i]));
  }
  write_file(path, buf);
}

LabeledDataset read_dataset(const std::filesystem::path& path) {
  const auto buf = read_file(path);
  binary::Reader in(buf);
  if (in.get_bytes(kMagic.size()) != kMagic) throw FormatError(path.string() + ": not a dataset file");
  const auto version = in.get<std::uint32_t>();
  if (version != kDatasetFormatVersion) {
    throw FormatError(path.string() + ": unsupported dataset version " + std::to_string(version));
  }
  LabeledDataset ds;
  ds.num_classes = static_cast<int>(in.get<std::uint32_t>());
  ds.num_groups = static_cast<int>(in.get<std::uint32_t>());
  const std::size_t d = in.get<std::uint32_t>();
  const std::uint64_t n = in.get<std::uint64_t>();
  ds.seed = in.get<std::uint64_t>();
  ds.skew = in.get<double>();
  const std::uint64_t row_bytes = d * 8 + 8;
  if (row_bytes == 0 || n > in.remaining() / row_bytes || n * row_bytes != in.remaining()) {
    throw FormatError(path.string() + ": payload size does not match header");
  }
  ds.features = Tensor(static_cast<std::size_t>(n), d);
  ds.labels.resize(n);
  ds.groups.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : ds.features.row(i)) v = in.get<double>();
    ds.labels[i] = static_cast<int>(in.get<std::uint32_t>());
    ds.groups[i] = static_cast<int>(in.get<std::uint32_t>());
  }
  try {
    ds.validate();
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
  dataset.validate();
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  const std::size_t d = dataset.dim();
  for (std::size_t k = 0; k < d; ++k) std::fprintf(f, "f%zu,", k);
  std::fprintf(f, "y,a\n");
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.features.row(i)) std::fprintf(f, "%.17g,", v);
    std::fprintf(f, "%d,%d\n", dataset.labels[i], dataset.groups[i]);
  }
  if (std::fclose(f) != 0) throw IoError("write failed for " + path.string());
}

}  // namespace mfd
