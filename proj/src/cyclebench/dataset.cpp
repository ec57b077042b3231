#include "cyclebench/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cyclebench/error.hpp"
#include "cyclebench/rng.hpp"

namespace cyclebench {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void split_80_20(Dataset& data) {
  const std::size_t n = data.size();
  const std::size_t n_train = n * 4 / 5;
  data.train.resize(n_train);
  data.val.resize(n - n_train);
  std::iota(data.train.begin(), data.train.end(), std::size_t{0});
  std::iota(data.val.begin(), data.val.end(), n_train);
}

// Balanced class assignment in random order.
std::vector<int> balanced_labels(std::size_t samples, std::size_t classes, Rng& rng) {
  std::vector<int> labels(samples);
  for (std::size_t i = 0; i < samples; ++i) labels[i] = static_cast<int>(i % classes);
  rng.shuffle(std::span<int>(labels));
  return labels;
}

Dataset gaussian_mixture(const GaussianMixtureTask& t, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "data");
  Dataset data;
  data.sample = Dims{1, t.dim, 1, 1};
  data.classes = t.classes;

  std::vector<double> means(t.classes * t.dim);
  for (std::size_t c = 0; c < t.classes; ++c) {
    double norm = 0.0;
    double* mu = means.data() + c * t.dim;
    for (std::size_t d = 0; d < t.dim; ++d) {
      mu[d] = rng.normal();
      norm += mu[d] * mu[d];
    }
    // Random unit directions are nearly orthogonal, so pairwise centre
    // distance is close to separation.
    const double scale = t.separation / std::sqrt(2.0) / std::sqrt(norm);
    for (std::size_t d = 0; d < t.dim; ++d) mu[d] *= scale;
  }

  const std::vector<int> truth = balanced_labels(t.samples, t.classes, rng);
  data.features.resize(t.samples * t.dim);
  data.labels.resize(t.samples);
  for (std::size_t i = 0; i < t.samples; ++i) {
    const double* mu = means.data() + static_cast<std::size_t>(truth[i]) * t.dim;
    for (std::size_t d = 0; d < t.dim; ++d) data.features[i * t.dim + d] = mu[d] + rng.normal();
    data.labels[i] = truth[i];
    if (t.label_noise > 0.0 && rng.uniform() < t.label_noise)
      data.labels[i] = static_cast<int>(rng.below(t.classes));
  }
  split_80_20(data);
  return data;
}

Dataset spirals(const SpiralsTask& t, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "data");
  Dataset data;
  data.sample = Dims{1, 2, 1, 1};
  data.classes = t.classes;
  data.labels = balanced_labels(t.samples, t.classes, rng);
  data.features.resize(t.samples * 2);
  for (std::size_t i = 0; i < t.samples; ++i) {
    const double r = rng.uniform();
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(data.labels[i]) / static_cast<double>(t.classes) +
                         3.0 * std::numbers::pi * r + t.noise * rng.normal();
    data.features[2 * i] = r * std::cos(theta);
    data.features[2 * i + 1] = r * std::sin(theta);
  }
  split_80_20(data);
  return data;
}

Dataset synthetic_images(const SyntheticImagesTask& t, std::uint64_t seed) {
  Rng rng = Rng::substream(seed, "data");
  Dataset data;
  data.sample = Dims{1, 1, t.side, t.side};
  data.classes = t.classes;
  data.labels = balanced_labels(t.samples, t.classes, rng);
  const std::size_t pixels = t.side * t.side;
  data.features.resize(t.samples * pixels);
  const double cycles = 2.0 * t.texture_scale;
  for (std::size_t i = 0; i < t.samples; ++i) {
    const double angle = std::numbers::pi * static_cast<double>(data.labels[i]) / static_cast<double>(t.classes);
    const double phase = 2.0 * std::numbers::pi * rng.uniform();
    const double ca = std::cos(angle), sa = std::sin(angle);
    for (std::size_t y = 0; y < t.side; ++y)
      for (std::size_t x = 0; x < t.side; ++x) {
        const double u = (static_cast<double>(x) * ca + static_cast<double>(y) * sa) / static_cast<double>(t.side);
        data.features[i * pixels + y * t.side + x] =
            std::sin(2.0 * std::numbers::pi * cycles * u + phase) + t.noise * rng.normal();
      }
  }
  split_80_20(data);
  return data;
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset, const std::string& path) {
  if (offset + 4 > bytes.size())
    throw Error(ErrorKind::format, "'" + path + "' truncated at byte " + std::to_string(offset));
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void expect_magic(const std::vector<unsigned char>& bytes, std::uint32_t expected, const std::string& path) {
  const std::uint32_t magic = read_be32(bytes, 0, path);
  if (magic != expected) {
    std::ostringstream msg;
    msg << "'" << path << "': bad IDX magic 0x" << std::hex;
    msg.width(8);
    msg.fill('0');
    msg << magic << " at byte 0 (expected 0x";
    msg.width(8);
    msg << expected << ")";
    throw Error(ErrorKind::format, msg.str());
  }
}

}  // namespace

std::vector<std::string> validate(const TaskSpec& task) {
  std::vector<std::string> issues;
  std::visit(overloaded{
                 [&](const GaussianMixtureTask& t) {
                   if (t.classes < 2) issues.emplace_back("gaussian_mixture needs at least 2 classes");
                   if (t.dim < 1) issues.emplace_back("gaussian_mixture dim must be at least 1");
                   if (!(t.separation >= 0.0) || !std::isfinite(t.separation))
                     issues.emplace_back("gaussian_mixture separation must be finite and non-negative");
                   if (!(t.label_noise >= 0.0 && t.label_noise <= 1.0))
                     issues.emplace_back("label noise rate outside [0, 1]");
                   if (t.samples < 5) issues.emplace_back("at least 5 samples required");
                 },
                 [&](const SpiralsTask& t) {
                   if (t.classes < 2) issues.emplace_back("spirals needs at least 2 classes");
                   if (!(t.noise >= 0.0) || !std::isfinite(t.noise)) issues.emplace_back("spiral noise must be non-negative");
                   if (t.samples < 5) issues.emplace_back("at least 5 samples required");
                 },
                 [&](const SyntheticImagesTask& t) {
                   if (t.classes < 2) issues.emplace_back("synthetic_images needs at least 2 classes");
                   if (t.side < 3) issues.emplace_back("synthetic_images side must be at least 3");
                   if (!(t.texture_scale > 0.0) || !std::isfinite(t.texture_scale))
                     issues.emplace_back("texture scale must be positive");
                   if (!(t.noise >= 0.0) || !std::isfinite(t.noise)) issues.emplace_back("image noise must be non-negative");
                   if (t.samples < 5) issues.emplace_back("at least 5 samples required");
                 },
                 [&](const IdxTask& t) {
                   if (t.images.empty()) issues.emplace_back("idx task needs an images path");
                   if (t.labels.empty()) issues.emplace_back("idx task needs a labels path");
                 },
             },
             task);
  return issues;
}

std::string task_kind(const TaskSpec& task) {
  return std::visit(overloaded{
                        [](const GaussianMixtureTask&) { return std::string("gaussian_mixture"); },
                        [](const SpiralsTask&) { return std::string("spirals"); },
                        [](const SyntheticImagesTask&) { return std::string("synthetic_images"); },
                        [](const IdxTask&) { return std::string("idx"); },
                    },
                    task);
}

Dataset gen_dataset(const TaskSpec& task, std::uint64_t seed) {
  auto issues = validate(task);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return std::visit(overloaded{
                        [&](const GaussianMixtureTask& t) { return gaussian_mixture(t, seed); },
                        [&](const SpiralsTask& t) { return spirals(t, seed); },
                        [&](const SyntheticImagesTask& t) { return synthetic_images(t, seed); },
                        [&](const IdxTask& t) { return load_idx(t.images, t.labels, t.classes); },
                    },
                    task);
}

Dims idx_sample_dims(const std::string& images_path) {
  std::ifstream in(images_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + images_path + "'");
  std::vector<unsigned char> header(16);
  in.read(reinterpret_cast<char*>(header.data()), 16);
  header.resize(static_cast<std::size_t>(in.gcount()));
  expect_magic(header, 0x00000803u, images_path);
  return Dims{1, 1, read_be32(header, 8, images_path), read_be32(header, 12, images_path)};
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path, std::size_t classes) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  expect_magic(images, 0x00000803u, images_path);
  expect_magic(labels, 0x00000801u, labels_path);

  const std::size_t n_images = read_be32(images, 4, images_path);
  const std::size_t rows = read_be32(images, 8, images_path);
  const std::size_t cols = read_be32(images, 12, images_path);
  const std::size_t n_labels = read_be32(labels, 4, labels_path);
  if (n_images != n_labels)
    throw Error(ErrorKind::inconsistent, "IDX image count " + std::to_string(n_images) + " differs from label count " +
                                             std::to_string(n_labels));
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + n_images * pixels)
    throw Error(ErrorKind::format, "'" + images_path + "' truncated at byte " + std::to_string(images.size()));
  if (labels.size() < 8 + n_labels)
    throw Error(ErrorKind::format, "'" + labels_path + "' truncated at byte " + std::to_string(labels.size()));
  if (n_images == 0) throw Error(ErrorKind::empty_input, "IDX files hold no samples");

  Dataset data;
  data.sample = Dims{1, 1, rows, cols};
  data.features.resize(n_images * pixels);
  for (std::size_t i = 0; i < n_images * pixels; ++i) data.features[i] = static_cast<double>(images[16 + i]) / 255.0;
  data.labels.resize(n_labels);
  int max_label = 0;
  for (std::size_t i = 0; i < n_labels; ++i) {
    data.labels[i] = labels[8 + i];
    max_label = std::max(max_label, data.labels[i]);
  }
  data.classes = classes == 0 ? static_cast<std::size_t>(max_label) + 1 : classes;
  if (static_cast<std::size_t>(max_label) >= data.classes)
    throw Error(ErrorKind::validation, "IDX label " + std::to_string(max_label) + " outside [0, " +
                                           std::to_string(data.classes) + ")");
  split_80_20(data);
  return data;
}

Tensor4 gather(const Dataset& data, std::span<const std::size_t> indices, Layout layout) {
  const Dims& s = data.sample;
  const std::size_t per = data.features_per_sample();
  Tensor4 out(Dims{indices.size(), s.c, s.h, s.w}, Layout::channels_first);
  auto dst = out.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double* src = data.features.data() + indices[i] * per;
    std::copy(src, src + per, dst.data() + i * per);
  }
  return to_layout(out, layout);
}

std::vector<int> gather_labels(const Dataset& data, std::span<const std::size_t> indices) {
  std::vector<int> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = data.labels[indices[i]];
  return out;
}

}  // namespace cyclebench

namespace cyclebench {

TaskShape task_shape(const TaskSpec& task) {
  auto issues = validate(task);
  if (!issues.empty()) throw ValidationError(std::move(issues));
  auto train_of = [](std::size_t n) { return n * 4 / 5; };
  return std::visit(overloaded{
                        [&](const GaussianMixtureTask& t) {
                          return TaskShape{Dims{1, t.dim, 1, 1}, t.classes, train_of(t.samples)};
                        },
                        [&](const SpiralsTask& t) { return TaskShape{Dims{1, 2, 1, 1}, t.classes, train_of(t.samples)}; },
                        [&](const SyntheticImagesTask& t) {
                          return TaskShape{Dims{1, 1, t.side, t.side}, t.classes, train_of(t.samples)};
                        },
                        [&](const IdxTask& t) {
                          const Dataset d = load_idx(t.images, t.labels, t.classes);
                          return TaskShape{d.sample, d.classes, d.train.size()};
                        },
                    },
                    task);
}

}  // namespace cyclebench
