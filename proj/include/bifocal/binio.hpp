#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bifocal/errors.hpp"

namespace bifocal::io {

// Little-endian primitives for the two binary formats (embedding blobs and
// model checkpoints). Encoding is explicit so files are portable.

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v & 0xffffffffu));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

// Cursor-style reader that throws DataError on overrun.
class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& buf, std::string origin)
      : buf_(buf), origin_(std::move(origin)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | buf_[pos_ + k];
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) {
      throw DataError(origin_ + ": truncated, needed " + std::to_string(n) +
                      " more bytes at offset " + std::to_string(pos_));
    }
  }

  const std::vector<std::uint8_t>& buf_;
  std::string origin_;
  std::size_t pos_ = 0;
};

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> buf(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read failed for " + path.string());
  return buf;
}

inline void write_file(const std::filesystem::path& path,
                       const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.close();
  if (!out) throw DataError("write failed for " + path.string());
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& buf) {
  write_file(path, buf.data(), buf.size());
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& text) {
  write_file(path, text.data(), text.size());
}

}  // namespace bifocal::io
