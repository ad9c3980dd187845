// Copyright 2026 The TTFS-SSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ttfs/data.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <sstream>

#include "iris_table.h"
#include "ttfs/error.h"

namespace ttfs {
namespace {

using Kind = DataFormatError::Kind;

std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataFormatError(Kind::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t BigEndian32(const std::vector<std::uint8_t>& bytes,
                          std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) |
         (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) |
         std::uint32_t{bytes[offset + 3]};
}

std::string Hex(std::uint32_t v) {
  std::ostringstream out;
  out << "0x" << std::hex << v;
  return out.str();
}

void CheckLength(const std::filesystem::path& path, std::size_t expected,
                 std::size_t actual) {
  if (actual < expected) {
    throw DataFormatError(Kind::kTruncated,
                          path.string() + ": expected " +
                              std::to_string(expected) + " bytes, got " +
                              std::to_string(actual));
  }
}

std::uint32_t ReadMagic(const std::filesystem::path& path,
                        const std::vector<std::uint8_t>& bytes,
                        std::uint32_t expected, std::size_t header) {
  CheckLength(path, header, bytes.size());
  const std::uint32_t magic = BigEndian32(bytes, 0);
  if (magic != expected) {
    throw DataFormatError(Kind::kWrongMagic, path.string() + ": magic " +
                                                 Hex(magic) + ", expected " +
                                                 Hex(expected));
  }
  return magic;
}

RawDataset NormalizeIris(const std::vector<std::array<double, 4>>& rows,
                         const std::vector<int>& labels) {
  RawDataset out;
  out.shape = Shape3{1, 1, 4};
  out.num_classes = 3;
  out.labels = labels;
  std::array<double, 4> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& r : rows) {
    for (int f = 0; f < 4; ++f) {
      lo[f] = std::min(lo[f], r[f]);
      hi[f] = std::max(hi[f], r[f]);
    }
  }
  out.features.reserve(rows.size() * 4);
  for (const auto& r : rows) {
    for (int f = 0; f < 4; ++f) {
      const double span = hi[f] - lo[f];
      out.features.push_back(span > 0.0 ? (r[f] - lo[f]) / span : 0.0);
    }
  }
  return out;
}

int IrisLabel(std::string field) {
  field.erase(0, field.find_first_not_of(" \t\""));
  field.erase(field.find_last_not_of(" \t\r\"") + 1);
  if (field.rfind("Iris-", 0) == 0) field.erase(0, 5);
  if (field == "setosa") return 0;
  if (field == "versicolor") return 1;
  if (field == "virginica") return 2;
  std::size_t used = 0;
  int value = -1;
  try {
    value = std::stoi(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size() || value < 0 || value > 2) return -1;
  return value;
}

std::filesystem::path FirstExisting(
    const std::filesystem::path& dir,
    std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (std::filesystem::exists(dir / name)) return dir / name;
  }
  return dir / *names.begin();
}

}  // namespace

RawDataset RawDataset::Head(std::size_t n) const {
  if (n == 0 || n >= size()) return *this;
  RawDataset out;
  out.shape = shape;
  out.num_classes = num_classes;
  out.split = split;
  out.labels.assign(labels.begin(), labels.begin() + n);
  const std::size_t stride = shape.size();
  if (!images.empty()) {
    out.images.assign(images.begin(), images.begin() + n * stride);
  }
  if (!features.empty()) {
    out.features.assign(features.begin(), features.begin() + n * stride);
  }
  return out;
}

void RawDataset::Validate() const {
  const std::size_t stride = shape.size();
  Require(images.empty() != features.empty(),
          "dataset must hold either images or features");
  Require((images.empty() ? features.size() : images.size()) ==
              size() * stride,
          "dataset payload does not match its item count");
  for (int label : labels) {
    Require(label >= 0 && label < num_classes, "label out of range");
  }
}

RawDataset LoadIdx(const std::filesystem::path& images,
                   const std::filesystem::path& labels) {
  const std::vector<std::uint8_t> img = ReadFile(images);
  const std::vector<std::uint8_t> lab = ReadFile(labels);
  ReadMagic(images, img, 0x00000803u, 16);
  ReadMagic(labels, lab, 0x00000801u, 8);
  const std::size_t count = BigEndian32(img, 4);
  const std::size_t rows = BigEndian32(img, 8);
  const std::size_t cols = BigEndian32(img, 12);
  const std::size_t label_count = BigEndian32(lab, 4);
  CheckLength(images, 16 + count * rows * cols, img.size());
  CheckLength(labels, 8 + label_count, lab.size());
  if (count != label_count) {
    throw DataFormatError(Kind::kCountMismatch,
                          std::to_string(count) + " images but " +
                              std::to_string(label_count) + " labels");
  }
  RawDataset out;
  out.shape = Shape3{static_cast<int>(rows), static_cast<int>(cols), 1};
  out.num_classes = 10;
  out.images.assign(img.begin() + 16, img.begin() + 16 + count * rows * cols);
  out.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = lab[8 + i];
    if (label > 9) {
      throw DataFormatError(Kind::kBadLabel, labels.string() + ": label " +
                                                 std::to_string(label) +
                                                 " at item " +
                                                 std::to_string(i));
    }
    out.labels.push_back(label);
  }
  return out;
}

RawDataset LoadCifar10(const std::vector<std::filesystem::path>& batches) {
  constexpr std::size_t kPlane = 32 * 32;
  constexpr std::size_t kRecord = 1 + 3 * kPlane;
  RawDataset out;
  out.shape = Shape3{32, 32, 3};
  out.num_classes = 10;
  for (const auto& path : batches) {
    const std::vector<std::uint8_t> bytes = ReadFile(path);
    if (bytes.size() % kRecord != 0) {
      throw DataFormatError(Kind::kBadRecordSize,
                            path.string() + ": " +
                                std::to_string(bytes.size()) +
                                " bytes is not a multiple of 3073");
    }
    const std::size_t records = bytes.size() / kRecord;
    out.images.reserve(out.images.size() + records * 3 * kPlane);
    for (std::size_t r = 0; r < records; ++r) {
      const std::uint8_t* rec = bytes.data() + r * kRecord;
      if (rec[0] > 9) {
        throw DataFormatError(Kind::kBadLabel,
                              path.string() + ": label " +
                                  std::to_string(rec[0]) + " at record " +
                                  std::to_string(r));
      }
      out.labels.push_back(rec[0]);
      for (std::size_t p = 0; p < kPlane; ++p) {
        for (std::size_t c = 0; c < 3; ++c) {
          out.images.push_back(rec[1 + c * kPlane + p]);
        }
      }
    }
  }
  return out;
}

RawDataset LoadIris(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw DataFormatError(Kind::kIo, "cannot open " + csv.string());
  std::vector<std::array<double, 4>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    std::array<double, 4> row{};
    bool numeric = fields.size() == 5;
    for (int f = 0; numeric && f < 4; ++f) {
      char* end = nullptr;
      row[f] = std::strtod(fields[f].c_str(), &end);
      numeric = end != fields[f].c_str() && std::isfinite(row[f]);
    }
    const int label = numeric ? IrisLabel(fields[4]) : -1;
    if (!numeric || label < 0) {
      if (rows.empty() && labels.empty() && line_no == 1) continue;  // header
      throw DataFormatError(Kind::kParse, csv.string() + ":" +
                                              std::to_string(line_no) +
                                              ": expected 4 numbers and a "
                                              "class");
    }
    rows.push_back(row);
    labels.push_back(label);
  }
  if (rows.empty()) {
    throw DataFormatError(Kind::kParse, csv.string() + ": no rows");
  }
  return NormalizeIris(rows, labels);
}

RawDataset EmbeddedIris() {
  std::vector<std::array<double, 4>> rows;
  std::vector<int> labels;
  for (const internal::IrisRow& r : internal::kIrisRows) {
    rows.push_back({r.features[0], r.features[1], r.features[2],
                    r.features[3]});
    labels.push_back(r.label);
  }
  return NormalizeIris(rows, labels);
}

RawDataset LoadNamed(const std::string& dataset,
                     const std::filesystem::path& root, Split split) {
  const bool train = split == Split::kTrain;
  RawDataset out;
  if (dataset == "iris") {
    const auto csv = root / "iris" / "iris.csv";
    out = !root.empty() && std::filesystem::exists(csv) ? LoadIris(csv)
                                                        : EmbeddedIris();
  } else if (dataset == "mnist" || dataset == "fashion_mnist") {
    if (root.empty()) {
      throw DataFormatError(Kind::kIo, "dataset root is not set (TTFS_DATA_DIR)");
    }
    const auto dir = root / (dataset == "mnist" ? "mnist" : "fashion-mnist");
    const std::string p = train ? "train" : "t10k";
    const std::string img_a = p + "-images-idx3-ubyte";
    const std::string img_b = p + "-images.idx3-ubyte";
    const std::string lab_a = p + "-labels-idx1-ubyte";
    const std::string lab_b = p + "-labels.idx1-ubyte";
    out = LoadIdx(FirstExisting(dir, {img_a.c_str(), img_b.c_str()}),
                  FirstExisting(dir, {lab_a.c_str(), lab_b.c_str()}));
  } else if (dataset == "cifar10") {
    if (root.empty()) {
      throw DataFormatError(Kind::kIo, "dataset root is not set (TTFS_DATA_DIR)");
    }
    const auto dir = root / "cifar-10-batches-bin";
    std::vector<std::filesystem::path> files;
    if (train) {
      for (int i = 1; i <= 5; ++i) {
        files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
      }
    } else {
      files.push_back(dir / "test_batch.bin");
    }
    out = LoadCifar10(files);
  } else {
    throw DataFormatError(Kind::kIo, "unknown dataset '" + dataset + "'");
  }
  out.split = split;
  return out;
}

Shape3 EncodedShape(const RawDataset& raw, const EncodeOptions& options) {
  Shape3 s = raw.shape;
  if (raw.is_image()) {
    if (options.double_channels) s.channels *= 2;
    return s;
  }
  return Shape3{1, 1,
                static_cast<int>(s.size()) + (options.iris_bias ? 1 : 0)};
}

std::vector<std::uint8_t> FlipHorizontal(std::span<const std::uint8_t> image,
                                         const Shape3& shape) {
  std::vector<std::uint8_t> out(image.size());
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      for (int c = 0; c < shape.channels; ++c) {
        out[shape.Index(y, shape.width - 1 - x, c)] = image[shape.Index(y, x, c)];
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> Augment(std::span<const std::uint8_t> image,
                                  const Shape3& shape, std::mt19937_64& rng) {
  std::bernoulli_distribution flip(0.5);
  std::uniform_real_distribution<double> angle_deg(-15.0, 15.0);
  std::uniform_int_distribution<int> shift(0, 8);
  const bool do_flip = flip(rng);
  const double angle = angle_deg(rng) * std::numbers::pi / 180.0;
  const int oy = shift(rng) - 4;
  const int ox = shift(rng) - 4;

  std::vector<std::uint8_t> src(image.begin(), image.end());
  if (do_flip) src = FlipHorizontal(src, shape);

  const double cy = (shape.height - 1) / 2.0;
  const double cx = (shape.width - 1) / 2.0;
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);
  std::vector<std::uint8_t> out(image.size(), 0);
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      // Position in the rotated image, then rotate back into the source.
      const double ry = y + oy - cy;
      const double rx = x + ox - cx;
      const int sy = static_cast<int>(std::lround(cs * ry - sn * rx + cy));
      const int sx = static_cast<int>(std::lround(sn * ry + cs * rx + cx));
      if (sy < 0 || sy >= shape.height || sx < 0 || sx >= shape.width) continue;
      for (int c = 0; c < shape.channels; ++c) {
        out[shape.Index(y, x, c)] = src[shape.Index(sy, sx, c)];
      }
    }
  }
  return out;
}

EncodedSample EncodeSample(const RawDataset& raw, std::size_t index,
                           const EncodeOptions& options,
                           std::mt19937_64* rng) {
  Require(index < raw.size(), "sample index out of range");
  Require(options.tau_in > 0.0, "tau_in must be > 0");
  const double tau = options.tau_in;
  const std::size_t stride = raw.shape.size();
  EncodedSample out;
  out.label = raw.labels[index];
  if (!raw.is_image()) {
    const std::size_t n = stride + (options.iris_bias ? 1 : 0);
    out.input = SpikeVector(n);
    for (std::size_t f = 0; f < stride; ++f) {
      const double x = std::clamp(raw.features[index * stride + f], 0.0, 1.0);
      out.input.Set(f, tau * x);
    }
    if (options.iris_bias) out.input.Set(stride, 0.0);
    return out;
  }

  std::span<const std::uint8_t> pixels(raw.images.data() + index * stride,
                                       stride);
  std::vector<std::uint8_t> augmented;
  if (options.augment && raw.split == Split::kTrain && rng != nullptr) {
    augmented = Augment(pixels, raw.shape, *rng);
    pixels = augmented;
  }
  const Shape3 in = raw.shape;
  const Shape3 enc = EncodedShape(raw, options);
  out.input = SpikeVector(enc.size());
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      for (int c = 0; c < in.channels; ++c) {
        const double v = pixels[in.Index(y, x, c)] / 255.0;
        out.input.Set(enc.Index(y, x, c), tau * (1.0 - v));
        if (options.double_channels) {
          out.input.Set(enc.Index(y, x, c + in.channels), tau * v);
        }
      }
    }
  }
  return out;
}

}  // namespace ttfs
