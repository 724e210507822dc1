// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/model/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace gramformer::model {

namespace {

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <class T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  bool has(std::size_t n) const { return in_.size() - pos_ >= n; }
  template <class T>
  T le(const std::string& context) {
    need(sizeof(T), context);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  std::string str(std::size_t n, const std::string& context) {
    need(n, context);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n, const std::string& context) {
    if (!has(n)) throw CheckpointError("unexpected end of file at " + context);
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParameterStore& params) {
  Writer w;
  w.bytes("GRMF", 4);
  w.le<std::uint16_t>(kCheckpointVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& e : params.entries()) {
    if (e.name.size() > std::numeric_limits<std::uint16_t>::max()) throw CheckpointError("tensor name too long: " + e.name);
    w.le<std::uint16_t>(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.le<std::uint8_t>(static_cast<std::uint8_t>(e.tensor.rank()));
    for (auto d : e.tensor.dims()) w.le<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (double v : e.tensor.values()) w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(v));
  }
  return w.take();
}

ParameterStore decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (!r.has(4) || r.str(4, "header") != "GRMF") throw CheckpointError("bad magic");
  const auto version = r.le<std::uint16_t>("header");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = r.le<std::uint32_t>("header");
  ParameterStore out;
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::string slot = "tensor #" + std::to_string(k);
    const auto name_len = r.le<std::uint16_t>(slot);
    const std::string name = r.str(name_len, slot);
    const std::string where = "tensor " + name;
    const auto rank = r.le<std::uint8_t>(where);
    if (rank == 0) throw CheckpointError("tensor " + name + " has rank 0");
    Shape dims;
    for (std::uint8_t i = 0; i < rank; ++i) {
      const auto d = r.le<std::uint32_t>(where);
      if (d == 0) throw CheckpointError("tensor " + name + " has a zero extent");
      dims.push_back(d);
    }
    std::vector<double> values(shape_size(dims));
    for (auto& v : values) v = std::bit_cast<double>(r.le<std::uint64_t>(where));
    if (out.contains(name)) throw CheckpointError("duplicate tensor name " + name);
    out.add(name, Tensor(std::move(dims), std::move(values)));
  }
  if (!r.at_end()) throw CheckpointError("trailing bytes after last tensor");
  return out;
}

void load_parameters(std::span<const std::uint8_t> bytes, ParameterStore& params) {
  ParameterStore loaded = decode_checkpoint(bytes);
  for (const auto& e : loaded.entries()) {
    const Tensor* target = params.find(e.name);
    if (target == nullptr) throw CheckpointError("unknown tensor name " + e.name);
    if (target->dims() != e.tensor.dims()) {
      throw CheckpointError("shape mismatch for tensor " + e.name + ": checkpoint " + shape_string(e.tensor.dims()) +
                            ", model " + shape_string(target->dims()));
    }
  }
  for (const auto& e : params.entries()) {
    if (!loaded.contains(e.name)) throw CheckpointError("checkpoint is missing tensor " + e.name);
  }
  for (auto& e : params.entries()) e.tensor = loaded.get(e.name);
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params) {
  const auto bytes = encode_checkpoint(params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("write failed for " + path.string());
}

void load_checkpoint(const std::filesystem::path& path, ParameterStore& params) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  load_parameters(bytes, params);
}

}  // namespace gramformer::model
