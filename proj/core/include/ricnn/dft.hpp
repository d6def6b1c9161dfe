#pragma once

#include <complex>
#include <vector>

#include "ricnn/tensor.hpp"

namespace ricnn {

using Complex = std::complex<double>;

/// Row-major complex grid.
struct Spectrum {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Complex> values;

  const Complex& operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  Complex& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Unnormalised 2D DFT, Z(k, i) = sum_h sum_r z(h, r) exp(-j 2 pi (hk/K + ri/L)).
/// Separable; each axis uses an iterative radix-2 FFT when its length is a
/// power of two and a direct O(n^2) transform otherwise.
template <typename T>
Spectrum dft2(const Tensor<T>& z);

/// The literal quadruple-loop double sum; O((K L)^2). Reference oracle.
template <typename T>
Spectrum dft2_naive(const Tensor<T>& z);

/// Elementwise magnitude of dft2(z). If `spectrum` is given the complex
/// transform is stored there for the backward pass.
template <typename T>
Tensor<T> dft2_magnitude(const Tensor<T>& z, Spectrum* spectrum = nullptr);

template <typename T>
Tensor<T> dft2_magnitude_naive(const Tensor<T>& z);

/// Bins with |Z| below this receive zero gradient.
inline constexpr double kMagnitudeEpsilon = 1e-12;

/// Gradient with respect to z of sum(grad * |dft2(z)|):
/// Re(A^H (grad * Z / |Z|)) where A is the DFT matrix.
template <typename T>
Tensor<T> dft2_magnitude_backward(const Tensor<T>& grad, const Spectrum& spectrum);

/// In-place 1D transform of length n (any n >= 1), unnormalised, sign -1.
void dft1_inplace(std::vector<Complex>& x);

}  // namespace ricnn
