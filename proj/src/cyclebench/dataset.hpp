#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cyclebench/tensor.hpp"

namespace cyclebench {

/// Isotropic unit-variance Gaussian clusters, one per class, whose centres sit
/// at pairwise distance close to `separation`.
struct GaussianMixtureTask {
  std::size_t classes = 10;
  std::size_t dim = 32;
  double separation = 6.0;
  double label_noise = 0.0;
  std::size_t samples = 6250;
};

/// Interleaved 2-D spiral arms, one per class.
struct SpiralsTask {
  std::size_t classes = 3;
  double noise = 0.2;
  std::size_t samples = 1500;
};

/// Single-channel oriented sinusoidal textures with a random phase per sample;
/// the class is the orientation.
struct SyntheticImagesTask {
  std::size_t classes = 4;
  std::size_t side = 12;
  double texture_scale = 1.0;
  double noise = 0.5;
  std::size_t samples = 1000;
};

/// Byte images and labels in IDX format. classes == 0 infers max label + 1.
struct IdxTask {
  std::string images;
  std::string labels;
  std::size_t classes = 0;
};

using TaskSpec = std::variant<GaussianMixtureTask, SpiralsTask, SyntheticImagesTask, IdxTask>;

std::vector<std::string> validate(const TaskSpec& task);
std::string task_kind(const TaskSpec& task);

/// Labelled samples plus a fixed split: the first floor(0.8 n) samples train,
/// the rest validate. Generators emit samples in random order so the split is
/// unbiased.
struct Dataset {
  Dims sample{1, 1, 1, 1};          // n == 1; (c, h, w) of one sample
  std::vector<double> features;      // per sample, logical (c, h, w) order
  std::vector<int> labels;
  std::size_t classes = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t features_per_sample() const noexcept { return sample.c * sample.h * sample.w; }
};

/// Deterministic for a given (task, seed).
Dataset gen_dataset(const TaskSpec& task, std::uint64_t seed);

/// IDX rank-3 unsigned-byte images (magic 0x00000803) with rank-1 labels
/// (magic 0x00000801). Pixels are scaled by 1/255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path, std::size_t classes = 0);

/// Reads only the IDX image header: (1, 1, rows, cols).
Dims idx_sample_dims(const std::string& images_path);

/// Batch of the given samples in the requested layout.
Tensor4 gather(const Dataset& data, std::span<const std::size_t> indices, Layout layout);
std::vector<int> gather_labels(const Dataset& data, std::span<const std::size_t> indices);

}  // namespace cyclebench

namespace cyclebench {

/// Sample dims, class count and training-split size of a task without
/// generating it (IDX tasks read their headers and labels).
struct TaskShape {
  Dims sample;
  std::size_t classes = 0;
  std::size_t train_samples = 0;
};

TaskShape task_shape(const TaskSpec& task);

}  // namespace cyclebench
