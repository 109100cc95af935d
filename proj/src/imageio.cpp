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

#include "msunique/imageio.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "msunique/error.hpp"

namespace msunique {

namespace {

class PpmReader {
 public:
  explicit PpmReader(const std::string& bytes) : bytes_(bytes) {}

  // Next whitespace-delimited header token, skipping '#' comments.
  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_])) &&
           bytes_[pos_] != '#') {
      out.push_back(bytes_[pos_++]);
    }
    if (out.empty()) throw DataError("malformed image: truncated header");
    return out;
  }

  int integer() {
    const std::string t = token();
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || v < 0) {
      throw DataError("malformed image: bad header field '" + t + "'");
    }
    return v;
  }

  // The single whitespace byte separating the header from a binary raster.
  void consume_raster_separator() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw DataError("malformed image: missing raster separator");
    }
    ++pos_;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  unsigned char byte_at(std::size_t offset) const {
    return static_cast<unsigned char>(bytes_[pos_ + offset]);
  }
  bool at_end() {
    skip_space_and_comments();
    return pos_ >= bytes_.size();
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  fields.push_back(field);
  return fields;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_real(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

}  // namespace

void validate(const RgbImage& img) {
  if (img.g.rows() != img.r.rows() || img.g.cols() != img.r.cols() ||
      img.b.rows() != img.r.rows() || img.b.cols() != img.r.cols()) {
    throw DataError("image planes differ in size");
  }
  if (img.r.size() == 0) throw DataError("empty image");
  for (const Plane* p : {&img.r, &img.g, &img.b}) {
    if (!p->allFinite() || p->minCoeff() < 0.0 || p->maxCoeff() > 1.0) {
      throw DataError("image samples outside [0,1]");
    }
  }
}

RgbImage decode_ppm(const std::string& bytes) {
  PpmReader reader(bytes);
  const std::string magic = reader.token();
  if (magic == "P5" || magic == "P2") {
    throw DataError("grayscale input not supported");
  }
  if (magic != "P6" && magic != "P3") {
    throw DataError("malformed image: unsupported format '" + magic + "'");
  }
  const int width = reader.integer();
  const int height = reader.integer();
  const int maxval = reader.integer();
  if (width <= 0 || height <= 0 || maxval <= 0) {
    throw DataError("malformed image: non-positive header field");
  }
  if (maxval > 255) throw DataError("unsupported bit depth (maxval > 255)");

  RgbImage img{Plane(height, width), Plane(height, width),
               Plane(height, width)};
  const std::size_t samples = std::size_t(width) * std::size_t(height) * 3;

  auto store = [&](std::size_t i, int v) {
    if (v > maxval) throw DataError("malformed image: sample exceeds maxval");
    const std::size_t pixel = i / 3;
    const Eigen::Index row = Eigen::Index(pixel / std::size_t(width));
    const Eigen::Index col = Eigen::Index(pixel % std::size_t(width));
    Plane* planes[3] = {&img.r, &img.g, &img.b};
    (*planes[i % 3])(row, col) = double(v) / double(maxval);
  };

  if (magic == "P6") {
    reader.consume_raster_separator();
    if (reader.remaining() < samples) {
      throw DataError("malformed image: truncated pixel data");
    }
    for (std::size_t i = 0; i < samples; ++i) store(i, reader.byte_at(i));
  } else {
    for (std::size_t i = 0; i < samples; ++i) {
      if (reader.at_end()) {
        throw DataError("malformed image: truncated pixel data");
      }
      store(i, reader.integer());
    }
  }
  return img;
}

RgbImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DataError("missing file: " + path.string());
  }
  try {
    return decode_ppm(read_file(path));
  } catch (const DataError& e) {
    throw DataError(std::string(e.what()) + " (" + path.string() + ")");
  }
}

std::string encode_ppm(const RgbImage& img) {
  validate(img);
  std::string out = "P6\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  out.reserve(out.size() + std::size_t(img.r.size()) * 3);
  for (Eigen::Index y = 0; y < img.height(); ++y) {
    for (Eigen::Index x = 0; x < img.width(); ++x) {
      for (const Plane* p : {&img.r, &img.g, &img.b}) {
        const double v = std::lround((*p)(y, x) * 255.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(v)));
      }
    }
  }
  return out;
}

void save_ppm(const RgbImage& img, const std::filesystem::path& path) {
  const std::string bytes = encode_ppm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<SubjectiveEntry> parse_manifest(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.lexically_normal()
                            : (base / fp).lexically_normal();
  };

  std::string line;
  bool have_header = false;
  std::vector<SubjectiveEntry> entries;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
      if (line != "dist_path,ref_path,score,std") {
        throw DataError("missing header: expected dist_path,ref_path,score,std");
      }
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const std::string where = " at line " + std::to_string(line_no);
    if (fields.size() != 4) throw DataError("wrong column count" + where);
    SubjectiveEntry e;
    if (trim(fields[0]).empty() || trim(fields[1]).empty()) {
      throw DataError("empty path" + where);
    }
    e.distorted_path = resolve(trim(fields[0]));
    e.reference_path = resolve(trim(fields[1]));
    if (!parse_real(fields[2], e.subjective_score)) {
      throw DataError("non-numeric score" + where);
    }
    if (!trim(fields[3]).empty()) {
      double sd = 0.0;
      if (!parse_real(fields[3], sd)) throw DataError("non-numeric std" + where);
      if (sd < 0.0) throw DataError("negative std" + where);
      e.score_std = sd;
    }
    entries.push_back(std::move(e));
  }
  if (!have_header) {
    throw DataError("missing header: expected dist_path,ref_path,score,std");
  }
  return entries;
}

void write_manifest(const std::vector<SubjectiveEntry>& entries,
                    const std::filesystem::path& path) {
  const std::filesystem::path base = path.parent_path();
  auto rel = [&](const std::filesystem::path& p) {
    if (base.empty()) return p.generic_string();
    return p.lexically_proximate(base).generic_string();
  };
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << "dist_path,ref_path,score,std\n";
  for (const auto& e : entries) {
    out << rel(e.distorted_path) << ',' << rel(e.reference_path) << ','
        << format_double(e.subjective_score) << ',';
    if (e.score_std) out << format_double(*e.score_std);
    out << '\n';
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace msunique
