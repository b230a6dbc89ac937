#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ewclab/matrix.hpp"

namespace ewclab {

inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

struct LabeledImages {
  Matrix inputs;  // one flattened image per row, pixel / 255
  std::vector<std::uint8_t> labels;
  std::size_t image_rows = 0;
  std::size_t image_cols = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

// Reads an IDX image file and its IDX label file. A non-zero `cap` keeps only
// the first `cap` samples. Throws DataError.
LabeledImages load_idx(const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path,
                       std::size_t cap = 0);

struct MnistData {
  LabeledImages train;
  LabeledImages test;
};

inline constexpr const char* kTrainImagesFile = "train-images-idx3-ubyte";
inline constexpr const char* kTrainLabelsFile = "train-labels-idx1-ubyte";
inline constexpr const char* kTestImagesFile = "t10k-images-idx3-ubyte";
inline constexpr const char* kTestLabelsFile = "t10k-labels-idx1-ubyte";

// Loads the four standard MNIST files from `dir`.
MnistData load_mnist(const std::filesystem::path& dir, std::size_t train_cap = 0,
                     std::size_t test_cap = 0);

}  // namespace ewclab
