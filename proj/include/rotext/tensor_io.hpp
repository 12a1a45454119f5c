// Copyright (c) 2026 The rotext authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rotext {

// On-disk layout: magic "RTEN", then little-endian u32 version (1), u32
// ndim, ndim u32 dims, then product(dims) little-endian 32-bit floats in
// row-major order.
inline constexpr std::uint32_t kTensorVersion = 1;

struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  std::size_t count() const {
    std::size_t n = 1;
    for (std::uint32_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
  }
  std::uint32_t dim(std::size_t i) const { return dims.at(i); }
};

// Errors name the file and the byte offset of the malformed field.
Tensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const Tensor& t);

}  // namespace rotext
