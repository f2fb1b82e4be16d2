#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <zlib.h>

#include "geotact/agent/policy.hpp"
#include "geotact/core/error.hpp"

namespace geotact {

// Binary layout, all integers and reals little-endian:
//   "GEOTACT1"
//   actor block, critic block, each:
//     u32 layer_count
//     per layer: u32 rows, u32 cols          (rows = output units)
//     per layer: rows*cols f64 weights (row-major), then rows f64 biases
//   u32 CRC-32 of every preceding byte
inline constexpr char kCheckpointMagic[8] = {'G', 'E', 'O', 'T', 'A', 'C', 'T', '1'};

namespace detail {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

class ByteReader {
 public:
  ByteReader(const std::vector<unsigned char>& data, std::size_t end) : data_(data), end_(end) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }

  std::size_t position() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw FormatError("checkpoint truncated");
  }
  const std::vector<unsigned char>& data_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

inline void write_net(std::vector<unsigned char>& out, const Mlp& net) {
  put_u32(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    put_u32(out, static_cast<std::uint32_t>(l.w.rows()));
    put_u32(out, static_cast<std::uint32_t>(l.w.cols()));
  }
  for (const auto& l : net.layers) {
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) put_f64(out, l.w(r, c));
    }
    for (Eigen::Index r = 0; r < l.b.size(); ++r) put_f64(out, l.b(r));
  }
}

inline Mlp read_net(ByteReader& in) {
  const std::uint32_t count = in.u32();
  if (count == 0 || count > 64) throw FormatError("checkpoint has an implausible layer count");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(count);
  for (auto& [rows, cols] : dims) {
    rows = in.u32();
    cols = in.u32();
    if (rows == 0 || cols == 0 || rows > (1u << 16) || cols > (1u << 16)) throw FormatError("checkpoint has implausible layer dimensions");
  }
  Mlp net;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (i > 0 && dims[i].second != dims[i - 1].first) throw FormatError("checkpoint layers do not chain");
    DenseLayer l;
    l.w.resize(dims[i].first, dims[i].second);
    l.b.resize(dims[i].first);
    for (Eigen::Index r = 0; r < l.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.w.cols(); ++c) l.w(r, c) = in.f64();
    }
    for (Eigen::Index r = 0; r < l.b.size(); ++r) l.b(r) = in.f64();
    net.layers.push_back(std::move(l));
  }
  return net;
}

inline std::uint32_t crc32_of(const unsigned char* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  return static_cast<std::uint32_t>(crc32(crc, data, static_cast<uInt>(n)));
}

}  // namespace detail

inline std::vector<unsigned char> serialize_checkpoint(const ActorCritic& net) {
  std::vector<unsigned char> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  detail::write_net(out, net.actor);
  detail::write_net(out, net.critic);
  detail::put_u32(out, detail::crc32_of(out.data(), out.size()));
  return out;
}

inline ActorCritic deserialize_checkpoint(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 4 || std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw FormatError("not a GEOTACT1 checkpoint");
  const std::size_t body = bytes.size() - 4;
  detail::ByteReader tail(bytes, bytes.size());
  tail.seek(body);
  if (tail.u32() != detail::crc32_of(bytes.data(), body)) throw FormatError("checkpoint checksum mismatch");
  detail::ByteReader in(bytes, body);
  in.seek(sizeof(kCheckpointMagic));
  ActorCritic net;
  net.actor = detail::read_net(in);
  net.critic = detail::read_net(in);
  if (in.position() != body) throw FormatError("checkpoint has trailing bytes");
  return net;
}

inline void save_checkpoint(const std::string& path, const ActorCritic& net) {
  const auto bytes = serialize_checkpoint(net);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot write checkpoint " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("failed writing checkpoint " + path);
}

inline ActorCritic load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open checkpoint " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace geotact
