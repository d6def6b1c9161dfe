#include "ricnn/dft.hpp"

#include <cmath>
#include <numbers>

namespace ricnn {

namespace {

Complex twiddle(std::size_t m, std::size_t n) {
  const double angle = -2.0 * std::numbers::pi * static_cast<double>(m % n) / static_cast<double>(n);
  return {std::cos(angle), std::sin(angle)};
}

void fft_radix2(std::vector<Complex>& x) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex w = twiddle(k * step, n);
        const Complex u = x[start + k];
        const Complex v = x[start + k + half] * w;
        x[start + k] = u + v;
        x[start + k + half] = u - v;
      }
    }
  }
}

void dft_direct(std::vector<Complex>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) acc += x[t] * twiddle(k * t, n);
    out[k] = acc;
  }
  x = std::move(out);
}

void transform(Spectrum& s) {
  std::vector<Complex> line;
  line.resize(s.cols);
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t j = 0; j < s.cols; ++j) line[j] = s(i, j);
    dft1_inplace(line);
    for (std::size_t j = 0; j < s.cols; ++j) s(i, j) = line[j];
  }
  line.resize(s.rows);
  for (std::size_t j = 0; j < s.cols; ++j) {
    for (std::size_t i = 0; i < s.rows; ++i) line[i] = s(i, j);
    dft1_inplace(line);
    for (std::size_t i = 0; i < s.rows; ++i) s(i, j) = line[i];
  }
}

template <typename T>
void require_grid(const Tensor<T>& z) {
  if (z.rank() != 2) throw ValidationError("2D DFT expects a K x L grid, got " + to_string(z.shape()));
}

}  // namespace

void dft1_inplace(std::vector<Complex>& x) {
  if (x.size() <= 1) return;
  if (is_power_of_two(x.size())) {
    fft_radix2(x);
  } else {
    dft_direct(x);
  }
}

template <typename T>
Spectrum dft2(const Tensor<T>& z) {
  require_grid(z);
  Spectrum s{z.extent(0), z.extent(1), {}};
  s.values.reserve(z.size());
  for (T v : z.values()) s.values.emplace_back(static_cast<double>(v), 0.0);
  transform(s);
  return s;
}

template <typename T>
Spectrum dft2_naive(const Tensor<T>& z) {
  require_grid(z);
  const std::size_t K = z.extent(0), L = z.extent(1);
  Spectrum s{K, L, std::vector<Complex>(K * L)};
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < L; ++i) {
      Complex acc{0.0, 0.0};
      for (std::size_t h = 0; h < K; ++h) {
        for (std::size_t r = 0; r < L; ++r) {
          const double phase = -2.0 * std::numbers::pi *
                               (static_cast<double>(h * k) / static_cast<double>(K) +
                                static_cast<double>(r * i) / static_cast<double>(L));
          acc += static_cast<double>(z(h, r)) * Complex(std::cos(phase), std::sin(phase));
        }
      }
      s(k, i) = acc;
    }
  }
  return s;
}

template <typename T>
Tensor<T> dft2_magnitude(const Tensor<T>& z, Spectrum* spectrum) {
  auto s = dft2(z);
  Tensor<T> out(z.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(std::abs(s.values[i]));
  if (spectrum) *spectrum = std::move(s);
  return out;
}

template <typename T>
Tensor<T> dft2_magnitude_naive(const Tensor<T>& z) {
  const auto s = dft2_naive(z);
  Tensor<T> out(z.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(std::abs(s.values[i]));
  return out;
}

template <typename T>
Tensor<T> dft2_magnitude_backward(const Tensor<T>& grad, const Spectrum& spectrum) {
  require_grid(grad);
  if (grad.extent(0) != spectrum.rows || grad.extent(1) != spectrum.cols) {
    throw ValidationError("dft2_magnitude_backward: gradient does not match cached spectrum");
  }
  // A^H u = conj(A conj(u)).
  Spectrum u{spectrum.rows, spectrum.cols, std::vector<Complex>(spectrum.values.size())};
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const Complex Z = spectrum.values[i];
    const double mag = std::abs(Z);
    u.values[i] = mag < kMagnitudeEpsilon ? Complex{} : std::conj(static_cast<double>(grad[i]) * Z / mag);
  }
  transform(u);
  Tensor<T> out(grad.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(u.values[i].real());
  return out;
}

template Spectrum dft2(const Tensor<float>&);
template Spectrum dft2(const Tensor<double>&);
template Spectrum dft2_naive(const Tensor<float>&);
template Spectrum dft2_naive(const Tensor<double>&);
template Tensor<float> dft2_magnitude(const Tensor<float>&, Spectrum*);
template Tensor<double> dft2_magnitude(const Tensor<double>&, Spectrum*);
template Tensor<float> dft2_magnitude_naive(const Tensor<float>&);
template Tensor<double> dft2_magnitude_naive(const Tensor<double>&);
template Tensor<float> dft2_magnitude_backward(const Tensor<float>&, const Spectrum&);
template Tensor<double> dft2_magnitude_backward(const Tensor<double>&, const Spectrum&);

}  // namespace ricnn
