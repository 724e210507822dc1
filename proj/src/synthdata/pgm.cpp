// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/synthdata/pgm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::synthdata {

namespace {

constexpr std::uint16_t kMaxval = 65535;

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> in) : in_(in) {}

  // Skips whitespace and comments, then reads one token. Empty at end of input.
  std::string token() {
    skip();
    std::string tok;
    while (pos_ < in_.size() && !is_space(in_[pos_]) && in_[pos_] != '#') tok.push_back(static_cast<char>(in_[pos_++]));
    return tok;
  }

  std::size_t unsigned_field(const char* name) {
    skip();
    const std::size_t line = line_, offset = pos_;
    const std::string tok = token();
    if (tok.empty()) throw ParseError(std::string("pgm: missing ") + name, line, offset);
    std::size_t v = 0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size()) {
      throw ParseError(std::string("pgm: malformed ") + name + " '" + tok + "'", line, offset);
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_of_header() {
    if (pos_ >= in_.size() || !is_space(in_[pos_])) throw ParseError("pgm: missing pixel data", line_, pos_);
    if (in_[pos_] == '\n') ++line_;
    ++pos_;
  }

  std::optional<double> scale() const { return scale_; }
  std::size_t pos() const { return pos_; }
  std::size_t line() const { return line_; }

 private:
  static bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

  void skip() {
    while (pos_ < in_.size()) {
      const std::uint8_t c = in_[pos_];
      if (c == '#') {
        const std::size_t start = pos_ + 1;
        while (pos_ < in_.size() && in_[pos_] != '\n') ++pos_;
        comment(std::string(reinterpret_cast<const char*>(in_.data() + start), pos_ - start));
      } else if (is_space(c)) {
        if (c == '\n') ++line_;
        ++pos_;
      } else {
        return;
      }
    }
  }

  void comment(const std::string& text) {
    constexpr std::string_view key = " scale ";
    if (text.rfind(key, 0) != 0) return;
    const char* first = text.data() + key.size();
    double v = 0.0;
    const auto r = std::from_chars(first, text.data() + text.size(), v);
    if (r.ec != std::errc{} || !(v > 0.0)) throw ParseError("pgm: malformed scale comment", line_, pos_);
    scale_ = v;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::optional<double> scale_;
};

}  // namespace

std::vector<std::uint8_t> encode_pgm(const Pgm& pgm) {
  if (pgm.samples.size() != pgm.width * pgm.height) throw ContractError("encode_pgm: sample count does not match size");
  std::string header = "P5\n";
  if (pgm.scale) header += "# scale " + format_double(*pgm.scale) + "\n";
  header += std::to_string(pgm.width) + " " + std::to_string(pgm.height) + "\n" + std::to_string(kMaxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + 2 * pgm.samples.size());
  for (std::uint16_t s : pgm.samples) {
    out.push_back(static_cast<std::uint8_t>(s >> 8));
    out.push_back(static_cast<std::uint8_t>(s & 0xFF));
  }
  return out;
}

Pgm decode_pgm(std::span<const std::uint8_t> bytes) {
  HeaderReader r(bytes);
  const std::string magic = r.token();
  if (magic.empty()) throw ParseError("pgm: missing magic number", r.line(), r.pos());
  if (magic != "P5") throw ParseError("pgm: bad magic number '" + magic + "'", 1, 0);
  Pgm pgm;
  pgm.width = r.unsigned_field("width");
  pgm.height = r.unsigned_field("height");
  const std::size_t maxval = r.unsigned_field("maxval");
  if (pgm.width == 0 || pgm.height == 0) throw ParseError("pgm: zero image extent", r.line(), r.pos());
  if (maxval != kMaxval) throw ParseError("pgm: unsupported maxval " + std::to_string(maxval), r.line(), r.pos());
  r.end_of_header();
  pgm.scale = r.scale();
  const std::size_t n = pgm.width * pgm.height;
  const std::size_t start = r.pos();
  if (bytes.size() - start < 2 * n) {
    throw ParseError("pgm: truncated pixel data (" + std::to_string((bytes.size() - start) / 2) + " of " +
                         std::to_string(n) + " samples)",
                     r.line(), bytes.size());
  }
  pgm.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pgm.samples[i] = static_cast<std::uint16_t>((bytes[start + 2 * i] << 8) | bytes[start + 2 * i + 1]);
  }
  return pgm;
}

void write_pgm(const std::filesystem::path& path, const Pgm& pgm) {
  const auto bytes = encode_pgm(pgm);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

Pgm read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

namespace {

Pgm blank(const Tensor& map) {
  if (map.rank() != 2) throw ShapeError("pgm: expected an H×W map, got " + shape_string(map.dims()));
  Pgm pgm;
  pgm.height = map.dim(0);
  pgm.width = map.dim(1);
  pgm.samples.resize(map.size());
  return pgm;
}

std::uint16_t to_sample(double v) { return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * kMaxval)); }

}  // namespace

Pgm quantize_unit(const Tensor& map) {
  Pgm pgm = blank(map);
  for (std::size_t i = 0; i < map.size(); ++i) pgm.samples[i] = to_sample(map[i]);
  return pgm;
}

Pgm quantize_scaled(const Tensor& map) {
  Pgm pgm = blank(map);
  const double hi = *std::max_element(map.values().begin(), map.values().end());
  const double scale = hi > 0.0 ? hi / kMaxval : 1.0;
  pgm.scale = scale;
  for (std::size_t i = 0; i < map.size(); ++i) pgm.samples[i] = to_sample(map[i] / scale / kMaxval);
  return pgm;
}

Pgm quantize_minmax(const Tensor& map) {
  Pgm pgm = blank(map);
  const auto [lo_it, hi_it] = std::minmax_element(map.values().begin(), map.values().end());
  const double lo = *lo_it, span = *hi_it - *lo_it;
  for (std::size_t i = 0; i < map.size(); ++i) pgm.samples[i] = span > 0.0 ? to_sample((map[i] - lo) / span) : 0;
  return pgm;
}

Tensor dequantize(const Pgm& pgm) {
  const double scale = pgm.scale.value_or(1.0 / kMaxval);
  Tensor out({pgm.height, pgm.width});
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pgm.samples[i] * scale;
  return out;
}

}  // namespace gramformer::synthdata
