#include "ewclab/mnist.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>

#include "ewclab/errors.hpp"

namespace ewclab {
namespace {

using Kind = DataError::Kind;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(Kind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes,
                        std::size_t offset, const std::filesystem::path& path) {
  if (bytes.size() < offset + 4) {
    throw DataError(Kind::kTruncated, path.string() + ": truncated IDX header");
  }
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

void expect_magic(std::uint32_t found, std::uint32_t expected,
                  const std::filesystem::path& path) {
  if (found != expected) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad magic 0x%08x (expected 0x%08x)", found,
                  expected);
    throw DataError(Kind::kBadMagic, path.string() + ": " + buf);
  }
}

void expect_payload(const std::vector<std::uint8_t>& bytes, std::size_t header,
                    std::size_t payload, const std::filesystem::path& path) {
  if (bytes.size() < header + payload) {
    throw DataError(Kind::kTruncated,
                    path.string() + ": truncated, expected " +
                        std::to_string(header + payload) + " bytes, found " +
                        std::to_string(bytes.size()));
  }
}

}  // namespace

LabeledImages load_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path,
                       std::size_t cap) {
  const auto label_bytes = read_file(labels_path);
  expect_magic(read_be32(label_bytes, 0, labels_path), kIdxLabelMagic,
               labels_path);
  const std::size_t label_count = read_be32(label_bytes, 4, labels_path);
  expect_payload(label_bytes, 8, label_count, labels_path);

  const auto image_bytes = read_file(images_path);
  expect_magic(read_be32(image_bytes, 0, images_path), kIdxImageMagic,
               images_path);
  const std::size_t image_count = read_be32(image_bytes, 4, images_path);
  const std::size_t rows = read_be32(image_bytes, 8, images_path);
  const std::size_t cols = read_be32(image_bytes, 12, images_path);
  const std::size_t pixels = rows * cols;
  expect_payload(image_bytes, 16, image_count * pixels, images_path);

  if (image_count != label_count) {
    throw DataError(Kind::kCountMismatch,
                    images_path.string() + " holds " +
                        std::to_string(image_count) + " images but " +
                        labels_path.string() + " holds " +
                        std::to_string(label_count) + " labels");
  }

  const std::size_t n = cap == 0 ? image_count : std::min(cap, image_count);
  LabeledImages out;
  out.image_rows = rows;
  out.image_cols = cols;
  out.labels.assign(label_bytes.begin() + 8, label_bytes.begin() + 8 + n);
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] > 9) {
      throw DataError(Kind::kInvalidLabel,
                      labels_path.string() + ": label " +
                          std::to_string(out.labels[i]) + " at index " +
                          std::to_string(i) + " is not a digit");
    }
  }
  out.inputs = Matrix(n, pixels);
  auto dst = out.inputs.values();
  for (std::size_t i = 0; i < n * pixels; ++i) {
    dst[i] = static_cast<double>(image_bytes[16 + i]) / 255.0;
  }
  return out;
}

MnistData load_mnist(const std::filesystem::path& dir, std::size_t train_cap,
                     std::size_t test_cap) {
  MnistData data;
  data.train = load_idx(dir / kTrainImagesFile, dir / kTrainLabelsFile, train_cap);
  data.test = load_idx(dir / kTestImagesFile, dir / kTestLabelsFile, test_cap);
  return data;
}

}  // namespace ewclab
