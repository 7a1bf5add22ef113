// Copyright 2026 The mnmmol Authors
// SPDX-License-Identifier: Apache-2.0

#include "io/array_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>

#include "error.hpp"

namespace mnm::io {
namespace {

constexpr char kMagic[4] = {'M', 'N', 'M', '1'};
constexpr std::uint8_t kDtypeF64 = 0;

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const std::string& in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

}  // namespace

std::string encode_array(const Tensor& t) {
  if (t.rank() > std::numeric_limits<std::uint8_t>::max()) throw InvalidArgument("encode_array: rank above 255");
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kDtypeF64));
  out.push_back(static_cast<char>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw InvalidArgument("encode_array: dimension above 2^32 - 1");
    put_le(out, d, 4);
  }
  out.reserve(out.size() + 8 * t.size());
  for (double v : t.values()) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  return out;
}

Tensor decode_array(const std::string& bytes) {
  if (bytes.size() < 4) throw FormatError(FormatErrorKind::truncated, "array: file shorter than the magic");
  if (bytes.compare(0, 4, kMagic, 4) != 0) throw FormatError(FormatErrorKind::bad_magic, "array: bad magic");
  if (bytes.size() < 6) throw FormatError(FormatErrorKind::truncated, "array: truncated header");
  const auto dtype = static_cast<std::uint8_t>(bytes[4]);
  if (dtype != kDtypeF64) {
    throw FormatError(FormatErrorKind::unknown_dtype, "array: unknown dtype code " + std::to_string(dtype));
  }
  const std::size_t ndim = static_cast<unsigned char>(bytes[5]);
  const std::size_t header = 6 + 4 * ndim;
  if (bytes.size() < header) throw FormatError(FormatErrorKind::truncated, "array: truncated dimensions");
  Shape shape(ndim);
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    shape[i] = static_cast<std::size_t>(get_le(bytes, 6 + 4 * i, 4));
    count *= shape[i];
  }
  const std::size_t expected = header + 8 * count;
  if (bytes.size() < expected) {
    throw FormatError(FormatErrorKind::truncated, "array: payload has " + std::to_string(bytes.size() - header) +
                                                      " bytes, expected " + std::to_string(8 * count));
  }
  if (bytes.size() > expected) throw FormatError(FormatErrorKind::malformed, "array: trailing bytes after payload");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = std::bit_cast<double>(get_le(bytes, header + 8 * i, 8));
  return Tensor(std::move(shape), std::move(data));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

void write_array(const std::filesystem::path& path, const Tensor& t) { write_file(path, encode_array(t)); }

Tensor read_array(const std::filesystem::path& path) {
  try {
    return decode_array(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(e.detail(), path.string() + ": " + e.what());
  }
}

}  // namespace mnm::io
