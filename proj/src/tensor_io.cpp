// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#include "rotext/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "rotext/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "tensor I/O assumes a little-endian host");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559,
              "tensor payload is IEEE-754 binary32");

namespace rotext {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'E', 'N'};
constexpr std::uint32_t kMaxNdim = 8;

[[noreturn]] void bad(const std::string& path, std::size_t offset,
                      const std::string& what) {
  fail(Status::Parse,
       path + ": " + what + " at byte " + std::to_string(offset));
}

void read_exact(std::ifstream& in, const std::string& path, void* dst,
                std::size_t bytes, std::size_t offset, const char* what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    bad(path, offset, std::string("truncated ") + what);
}

}  // namespace

Tensor read_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::Io, "cannot open " + path);

  char magic[4];
  read_exact(in, path, magic, 4, 0, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) bad(path, 0, "bad magic");

  std::uint32_t version = 0;
  read_exact(in, path, &version, 4, 4, "version");
  if (version != kTensorVersion)
    bad(path, 4, "unsupported version " + std::to_string(version));

  std::uint32_t ndim = 0;
  read_exact(in, path, &ndim, 4, 8, "rank");
  if (ndim == 0 || ndim > kMaxNdim)
    bad(path, 8, "rank " + std::to_string(ndim) + " out of range [1," +
                     std::to_string(kMaxNdim) + "]");

  Tensor t;
  t.dims.resize(ndim);
  read_exact(in, path, t.dims.data(), 4 * ndim, 12, "dims");

  std::uint64_t count = 1;
  for (std::size_t i = 0; i < ndim; ++i) {
    std::size_t off = 12 + 4 * i;
    if (t.dims[i] == 0) bad(path, off, "zero dimension");
    count *= t.dims[i];
    if (count > (std::uint64_t{1} << 31))
      bad(path, off, "element count overflows");
  }

  std::size_t payload_off = 12 + 4 * std::size_t{ndim};
  t.data.resize(count);
  read_exact(in, path, t.data.data(), 4 * count, payload_off, "payload");

  char extra;
  if (in.read(&extra, 1), in.gcount() != 0)
    bad(path, payload_off + 4 * count, "trailing bytes");
  return t;
}

void write_tensor(const std::string& path, const Tensor& t) {
  if (t.dims.empty() || t.dims.size() > kMaxNdim)
    fail(Status::InvalidArgument, "tensor rank must be in [1,8]");
  if (t.count() != t.data.size())
    fail(Status::InvalidArgument,
         "tensor dims describe " + std::to_string(t.count()) +
             " elements but storage holds " + std::to_string(t.data.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Status::Io, "cannot open " + path + " for writing");
  auto ndim = static_cast<std::uint32_t>(t.dims.size());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kTensorVersion), 4);
  out.write(reinterpret_cast<const char*>(&ndim), 4);
  out.write(reinterpret_cast<const char*>(t.dims.data()), 4 * ndim);
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(4 * t.data.size()));
  if (!out) fail(Status::Io, "write failed on " + path);
}

}  // namespace rotext
