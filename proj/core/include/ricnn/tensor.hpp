#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ricnn/errors.hpp"

namespace ricnn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array. For spatial data the layout is H x W x depth with
/// depth innermost, so one image row of a feature map is a contiguous block.
template <typename T>
class Tensor {
  static_assert(std::is_floating_point_v<T>, "Tensor holds real scalars");

 public:
  using value_type = T;

  /// Rank-0 tensor holding a single zero.
  Tensor() : data_(1, T{0}) {}

  explicit Tensor(Shape shape, T fill = T{0});
  Tensor(Shape shape, std::vector<T> data);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T& operator[](std::size_t i) {
    assert(i < data_.size());
    return data_[i];
  }
  const T& operator[](std::size_t i) const {
    assert(i < data_.size());
    return data_[i];
  }

  template <typename... Idx>
  T& operator()(Idx... idx) {
    return data_[offset(idx...)];
  }
  template <typename... Idx>
  const T& operator()(Idx... idx) const {
    return data_[offset(idx...)];
  }

  void fill(T value);
  Tensor reshaped(Shape shape) const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  bool operator==(const Tensor&) const = default;

 private:
  template <typename... Idx>
  std::size_t offset(Idx... idx) const {
    static_assert(sizeof...(Idx) >= 1);
    assert(sizeof...(Idx) == shape_.size());
    const std::size_t indices[] = {static_cast<std::size_t>(idx)...};
    std::size_t off = 0;
    for (std::size_t a = 0; a < sizeof...(Idx); ++a) {
      assert(indices[a] < shape_[a]);
      off = off * shape_[a] + indices[a];
    }
    return off;
  }

  Shape shape_;
  std::vector<T> data_;
};

// Elementwise helpers.

template <typename T>
Tensor<T> hadamard(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
void add_inplace(Tensor<T>& acc, const Tensor<T>& x, T scale = T{1});

template <typename T>
double sum(const Tensor<T>& t);

template <typename T>
double max_abs(const Tensor<T>& t);

/// Largest elementwise |a - b|. Shapes must match.
template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b);

/// Index map of a quarter turn about the grid centre: the output at centred
/// coordinate (x, y) is the input at mu_n(x, y), where
/// mu_1(x, y) = (-y, x), mu_2 = (-x, -y), mu_3 = (y, -x).
/// x is the column offset and y the row offset from the centre. Any trailing
/// axes (depth) move with their pixel. quarter_turns is reduced mod 4.
template <typename T>
Tensor<T> rot90(const Tensor<T>& t, int quarter_turns);

/// out[i] = in[(i - amount) mod extent] along `axis`.
template <typename T>
Tensor<T> circular_shift(const Tensor<T>& t, std::size_t axis, long amount);

/// Integer translation of the two leading (spatial) axes; exposed pixels are
/// zero. Positive dx moves content right, positive dy moves it down.
template <typename T>
Tensor<T> translate(const Tensor<T>& t, int dx, int dy);

/// Zero-pads the spatial axes on the right/bottom so both extents are odd.
template <typename T>
Tensor<T> pad_to_odd(const Tensor<T>& t);

/// Centred coordinate of index i on an axis of odd extent m.
constexpr long centred(std::size_t i, std::size_t m) {
  return static_cast<long>(i) - static_cast<long>((m - 1) / 2);
}

}  // namespace ricnn
