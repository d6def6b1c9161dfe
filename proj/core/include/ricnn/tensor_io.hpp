#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ricnn/tensor.hpp"

namespace ricnn {

/// Binary tensor container:
///   "RTNS" | u8 version (1) | u8 dtype (0 = f32, 1 = f64) | u8 rank |
///   rank x u32 extents (LE) | row-major LE scalars.
enum class DType : std::uint8_t { F32 = 0, F64 = 1 };

template <typename T>
constexpr DType dtype_of() {
  return sizeof(T) == 4 ? DType::F32 : DType::F64;
}

template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t);

/// Reads either dtype and converts to T. Throws IoError on malformed input.
template <typename T>
Tensor<T> read_tensor(std::istream& is);

template <typename T>
void save_tensor(const std::filesystem::path& path, const Tensor<T>& t);

template <typename T>
Tensor<T> load_tensor(const std::filesystem::path& path);

/// dtype stored in a tensor file, without reading the payload.
DType peek_dtype(const std::filesystem::path& path);

/// Label side file: "RLBL" | u8 version (1) | u32 count (LE) | count x u32 (LE).
void save_labels(const std::filesystem::path& path, const std::vector<std::uint32_t>& labels);
std::vector<std::uint32_t> load_labels(const std::filesystem::path& path);

}  // namespace ricnn
