// Copyright 2026 The MS-UNIQUE Authors. All Rights Reserved.
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

#include "msunique/filterbank.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include <zlib.h>

#include "msunique/error.hpp"
#include "msunique/stats.hpp"

namespace msunique {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'U', 'B'};
constexpr std::uint32_t kVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  // Row-major regardless of the matrix's storage order.
  void matrix(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  void vector(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class ByteReader {
 public:
  ByteReader(const std::string& bytes, std::size_t end)
      : bytes_(bytes), end_(end) {}

  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw CorruptArtifact("truncated model bank");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    need(std::size_t(rows) * std::size_t(cols) * 8);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    return m;
  }
  Eigen::VectorXd vector(Eigen::Index n) {
    need(std::size_t(n) * 8);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = f64();
    return v;
  }
  std::size_t position() const { return pos_; }

 private:
  const std::string& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  while (n > 0) {
    const uInt piece = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data), piece);
    data += piece;
    n -= piece;
  }
  return static_cast<std::uint32_t>(crc);
}

int patch_side_for_dim(Eigen::Index dim) {
  const int p = static_cast<int>(std::lround(std::sqrt(double(dim) / 3.0)));
  if (p < 1 || 3 * Eigen::Index(p) * p != dim) {
    throw DataError("patch dimension " + std::to_string(dim) +
                    " is not 3*p*p");
  }
  return p;
}

}  // namespace

double weight_for(FilterKind kind) {
  switch (kind) {
    case FilterKind::kEdge: return 2.0;
    case FilterKind::kColor: return 0.5;
    default: return 1.0;
  }
}

const char* to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::kEdge: return "edge";
    case FilterKind::kColor: return "color";
    default: return "neutral";
  }
}

FilterLabel label_for_kurtosis(double kurtosis, double edge_threshold,
                               double color_threshold) {
  FilterLabel l;
  l.kurtosis = kurtosis;
  if (kurtosis > edge_threshold) {
    l.kind = FilterKind::kEdge;
  } else if (kurtosis < color_threshold) {
    l.kind = FilterKind::kColor;
  } else {
    l.kind = FilterKind::kNeutral;
  }
  l.weight = weight_for(l.kind);
  return l;
}

std::vector<FilterLabel> classify_filters(const DecoderModel& m,
                                          double edge_threshold,
                                          double color_threshold) {
  std::vector<FilterLabel> labels;
  labels.reserve(std::size_t(m.hidden()));
  for (Eigen::Index j = 0; j < m.hidden(); ++j) {
    const auto col = m.w1.col(j);
    Eigen::VectorXd f = col.array() - col.mean();
    const double norm = f.norm();
    // Centering a constant column leaves only rounding noise.
    if (!(norm > 1e-12 * col.cwiseAbs().maxCoeff() * std::sqrt(double(col.size()))) ||
        !(norm > 0.0) || m.input_dim() < 4) {
      FilterLabel neutral;
      labels.push_back(neutral);
      continue;
    }
    f /= norm;
    labels.push_back(label_for_kurtosis(stats::kurtosis_bias_corrected(f),
                                        edge_threshold, color_threshold));
  }
  return labels;
}

Eigen::Index FilterBank::total_filters() const {
  Eigen::Index total = 0;
  for (const auto& m : models) total += m.hidden();
  return total;
}

void validate(const FilterBank& bank) {
  if (bank.patch_side < 1) throw DataError("patch side must be positive");
  const Eigen::Index dim = 3 * Eigen::Index(bank.patch_side) * bank.patch_side;
  if (bank.whitening.dim() != dim || bank.whitening.zca.rows() != dim ||
      bank.whitening.zca.cols() != dim) {
    throw DataError("whitening dimension does not match patch side");
  }
  if (bank.models.size() != bank.labels.size()) {
    throw DataError("label sets do not match models");
  }
  std::set<Eigen::Index> widths;
  for (std::size_t i = 0; i < bank.models.size(); ++i) {
    validate(bank.models[i]);
    if (bank.models[i].input_dim() != dim) {
      throw DataError("model input dimension does not match patch side");
    }
    if (Eigen::Index(bank.labels[i].size()) != bank.models[i].hidden()) {
      throw DataError("label count does not match hidden width");
    }
    if (!widths.insert(bank.models[i].hidden()).second) {
      throw DataError("duplicate hidden width");
    }
  }
  if (!(bank.suppression_tau >= 0.0)) {
    throw DataError("suppression threshold must be non-negative");
  }
}

FilterBank train_bank(const PatchMatrix& patches, std::vector<int> sizes,
                      const TrainingConfig& cfg,
                      const BankTrainingOptions& options,
                      std::vector<std::vector<double>>* objective_traces) {
  if (sizes.empty()) throw DataError("no model sizes given");
  std::sort(sizes.begin(), sizes.end());
  if (std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
    throw DataError("model sizes must be distinct");
  }
  if (sizes.front() < 1) throw DataError("model sizes must be positive");

  FilterBank bank;
  bank.patch_side = patch_side_for_dim(patches.rows());
  bank.config = cfg;
  bank.suppression_tau = options.suppression_tau;
  bank.whitening = fit_whitening(patches, options.epsilon);
  const PatchMatrix white = apply_whitening(bank.whitening, patches);

  std::vector<std::vector<double>> traces(sizes.size());
  auto train_one = [&](std::size_t i) {
    TrainingConfig c = cfg;
    c.seed = cfg.seed + std::int64_t(i);
    return train_decoder(white, sizes[i], c, &traces[i]);
  };
  if (options.parallel && sizes.size() > 1) {
    std::vector<std::future<DecoderModel>> jobs;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, train_one, i));
    }
    for (auto& j : jobs) bank.models.push_back(j.get());
  } else {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      bank.models.push_back(train_one(i));
    }
  }
  for (const auto& m : bank.models) bank.labels.push_back(classify_filters(m));
  if (objective_traces) *objective_traces = std::move(traces);
  return bank;
}

std::string serialize_bank(const FilterBank& bank) {
  validate(bank);
  ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(bank.patch_side));
  w.f64(bank.whitening.epsilon);
  w.f64(bank.config.rho);
  w.f64(bank.config.beta);
  w.f64(bank.config.lambda);
  w.u32(static_cast<std::uint32_t>(bank.config.epochs));
  w.i64(bank.config.seed);
  w.f64(bank.suppression_tau);
  w.u32(static_cast<std::uint32_t>(bank.models.size()));

  w.u32(static_cast<std::uint32_t>(bank.whitening.dim()));
  w.vector(bank.whitening.mean);
  w.matrix(bank.whitening.zca);

  for (std::size_t i = 0; i < bank.models.size(); ++i) {
    const DecoderModel& m = bank.models[i];
    w.u32(static_cast<std::uint32_t>(m.hidden()));
    w.matrix(m.w1);
    w.vector(m.b1);
    w.matrix(m.w2);
    w.vector(m.b2);
    for (const auto& l : bank.labels[i]) w.u8(static_cast<std::uint8_t>(l.kind));
    for (const auto& l : bank.labels[i]) w.f64(l.kurtosis);
  }
  std::string& bytes = w.bytes();
  w.u32(crc32_of(bytes.data(), bytes.size()));
  return std::move(bytes);
}

FilterBank deserialize_bank(const std::string& bytes) {
  if (bytes.size() < 4) throw CorruptArtifact("truncated model bank");
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw CorruptArtifact("not a model bank (bad magic)");
  }
  if (bytes.size() < 8) throw CorruptArtifact("truncated model bank");
  // The trailer is parsed last; reading stops 4 bytes short of the end.
  ByteReader r(bytes, bytes.size() - 4);
  r.u32();  // magic
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw CorruptArtifact("unsupported model bank version " +
                          std::to_string(version));
  }

  FilterBank bank;
  bank.patch_side = static_cast<int>(r.u32());
  bank.whitening.epsilon = r.f64();
  bank.config.rho = r.f64();
  bank.config.beta = r.f64();
  bank.config.lambda = r.f64();
  bank.config.epochs = static_cast<int>(r.u32());
  bank.config.seed = r.i64();
  bank.suppression_tau = r.f64();
  const std::uint32_t model_count = r.u32();

  const Eigen::Index dim = r.u32();
  if (dim == 0 || dim != 3 * Eigen::Index(bank.patch_side) * bank.patch_side) {
    throw CorruptArtifact("whitening dimension does not match patch side");
  }
  bank.whitening.mean = r.vector(dim);
  bank.whitening.zca = r.matrix(dim, dim);

  for (std::uint32_t i = 0; i < model_count; ++i) {
    const Eigen::Index h = r.u32();
    if (h == 0) throw CorruptArtifact("model with zero hidden units");
    DecoderModel m;
    m.w1 = r.matrix(dim, h);
    m.b1 = r.vector(h);
    m.w2 = r.matrix(h, dim);
    m.b2 = r.vector(dim);
    std::vector<FilterLabel> labels(static_cast<std::size_t>(h));
    for (auto& l : labels) {
      const std::uint8_t k = r.u8();
      if (k > 2) throw CorruptArtifact("invalid filter label");
      l.kind = static_cast<FilterKind>(k);
      l.weight = weight_for(l.kind);
    }
    for (auto& l : labels) l.kurtosis = r.f64();
    bank.models.push_back(std::move(m));
    bank.labels.push_back(std::move(labels));
  }
  if (r.position() != bytes.size() - 4) {
    throw CorruptArtifact("unexpected trailing bytes in model bank");
  }
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= std::uint32_t(static_cast<std::uint8_t>(bytes[bytes.size() - 4 + i]))
              << (8 * i);
  }
  if (stored != crc32_of(bytes.data(), bytes.size() - 4)) {
    throw CorruptArtifact("model bank checksum failure");
  }
  try {
    validate(bank);
  } catch (const DataError& e) {
    throw CorruptArtifact(std::string("invalid model bank: ") + e.what());
  }
  return bank;
}

void save_bank(const FilterBank& bank, const std::filesystem::path& path) {
  const std::string bytes = serialize_bank(bank);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

FilterBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_bank(ss.str());
}

FilterMosaic render_filter_mosaic(const FilterBank& bank,
                                  std::size_t model_index,
                                  MosaicSelection selection) {
  if (model_index >= bank.models.size()) {
    throw DataError("model index out of range");
  }
  const DecoderModel& m = bank.models[model_index];
  const auto& labels = bank.labels[model_index];
  std::vector<Eigen::Index> chosen;
  for (Eigen::Index j = 0; j < m.hidden(); ++j) {
    const FilterKind k = labels[std::size_t(j)].kind;
    if (selection == MosaicSelection::kAll ||
        (selection == MosaicSelection::kEdge && k == FilterKind::kEdge) ||
        (selection == MosaicSelection::kColor && k == FilterKind::kColor)) {
      chosen.push_back(j);
    }
  }

  FilterMosaic out;
  const int p = bank.patch_side;
  out.layout.tiles = int(chosen.size());
  out.layout.columns =
      std::max(1, int(std::ceil(std::sqrt(double(chosen.size())) - 1e-12)));
  out.layout.rows =
      std::max(1, (out.layout.tiles + out.layout.columns - 1) / out.layout.columns);
  const Eigen::Index width = Eigen::Index(out.layout.columns) * (p + 1) + 1;
  const Eigen::Index height = Eigen::Index(out.layout.rows) * (p + 1) + 1;
  out.image.r = Plane::Zero(height, width);
  out.image.g = Plane::Zero(height, width);
  out.image.b = Plane::Zero(height, width);

  // Inverse of the linear part of RGB -> (Y, G, Cr).
  Eigen::Matrix3d forward;
  forward << 0.299, 0.587, 0.114,  //
      0.0, 1.0, 0.0,               //
      0.5, -0.418688, -0.081312;
  const Eigen::Matrix3d inverse = forward.inverse();

  const Eigen::Index pp = Eigen::Index(p) * p;
  for (std::size_t t = 0; t < chosen.size(); ++t) {
    const auto f = m.w1.col(chosen[t]);
    Eigen::MatrixXd rgb(3, pp);
    for (Eigen::Index k = 0; k < pp; ++k) {
      rgb.col(k) = inverse * Eigen::Vector3d(f(k), f(pp + k), f(2 * pp + k));
    }
    const double lo = rgb.minCoeff(), hi = rgb.maxCoeff();
    if (f.maxCoeff() > f.minCoeff() && hi - lo > 0.0) {
      rgb = (rgb.array() - lo) / (hi - lo);
    } else {
      rgb.setConstant(0.5);
    }
    const Eigen::Index top = Eigen::Index(t / std::size_t(out.layout.columns)) * (p + 1) + 1;
    const Eigen::Index left = Eigen::Index(t % std::size_t(out.layout.columns)) * (p + 1) + 1;
    for (Eigen::Index y = 0; y < p; ++y) {
      for (Eigen::Index x = 0; x < p; ++x) {
        const Eigen::Index k = y * p + x;
        out.image.r(top + y, left + x) = std::clamp(rgb(0, k), 0.0, 1.0);
        out.image.g(top + y, left + x) = std::clamp(rgb(1, k), 0.0, 1.0);
        out.image.b(top + y, left + x) = std::clamp(rgb(2, k), 0.0, 1.0);
      }
    }
  }
  return out;
}

MosaicLayout export_filter_mosaic(const FilterBank& bank,
                                  std::size_t model_index,
                                  const std::filesystem::path& path,
                                  MosaicSelection selection) {
  FilterMosaic mosaic = render_filter_mosaic(bank, model_index, selection);
  save_ppm(mosaic.image, path);
  return mosaic.layout;
}

}  // namespace msunique
