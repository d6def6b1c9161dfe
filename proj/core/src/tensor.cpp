#include "ricnn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace ricnn {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  for (auto e : shape) {
    if (e == 0) throw ValidationError("tensor extents must be >= 1, got " + to_string(shape));
  }
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ValidationError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                          to_string(b.shape()));
  }
}

template <typename T>
void require_spatial(const Tensor<T>& t, const char* what) {
  if (t.rank() < 2) throw ValidationError(std::string(what) + ": need at least two spatial axes");
}

std::size_t inner_size(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t a = 2; a < s.size(); ++a) n *= s[a];
  return n;
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  data_.assign(shape_size(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  check_extents(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw ValidationError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + to_string(shape_));
  }
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw ValidationError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

template <typename T>
Tensor<T> hadamard(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "hadamard");
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

template <typename T>
void add_inplace(Tensor<T>& acc, const Tensor<T>& x, T scale) {
  require_same_shape(acc, x, "add_inplace");
  T* dst = acc.data();
  const T* src = x.data();
  for (std::size_t i = 0; i < acc.size(); ++i) dst[i] += scale * src[i];
}

template <typename T>
double sum(const Tensor<T>& t) {
  double s = 0.0;
  for (T v : t.values()) s += static_cast<double>(v);
  return s;
}

template <typename T>
double max_abs(const Tensor<T>& t) {
  double m = 0.0;
  for (T v : t.values()) m = std::max(m, std::abs(static_cast<double>(v)));
  return m;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  }
  return m;
}

template <typename T>
Tensor<T> rot90(const Tensor<T>& t, int quarter_turns) {
  require_spatial(t, "rot90");
  const int n = ((quarter_turns % 4) + 4) % 4;
  if (n == 0) return t;

  const long h_in = static_cast<long>(t.extent(0));
  const long w_in = static_cast<long>(t.extent(1));
  Shape out_shape = t.shape();
  if (n % 2 == 1) std::swap(out_shape[0], out_shape[1]);
  const long h_out = static_cast<long>(out_shape[0]);
  const long w_out = static_cast<long>(out_shape[1]);
  const std::size_t inner = inner_size(t.shape());

  Tensor<T> out(out_shape);
  // Doubled centred coordinates keep even extents on the integer lattice.
  for (long i = 0; i < h_out; ++i) {
    for (long j = 0; j < w_out; ++j) {
      const long xo = 2 * j - (w_out - 1);
      const long yo = 2 * i - (h_out - 1);
      long xs = xo, ys = yo;
      switch (n) {
        case 1: xs = -yo; ys = xo; break;
        case 2: xs = -xo; ys = -yo; break;
        case 3: xs = yo; ys = -xo; break;
      }
      const long js = (xs + w_in - 1) / 2;
      const long is = (ys + h_in - 1) / 2;
      const T* src = t.data() + (static_cast<std::size_t>(is * w_in + js)) * inner;
      T* dst = out.data() + (static_cast<std::size_t>(i * w_out + j)) * inner;
      std::copy(src, src + inner, dst);
    }
  }
  return out;
}

template <typename T>
Tensor<T> circular_shift(const Tensor<T>& t, std::size_t axis, long amount) {
  if (axis >= t.rank()) throw ValidationError("circular_shift: axis out of range");
  const auto& s = t.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= s[a];
  for (std::size_t a = axis + 1; a < s.size(); ++a) inner *= s[a];
  const long n = static_cast<long>(s[axis]);
  const long shift = ((amount % n) + n) % n;

  Tensor<T> out(s);
  for (std::size_t o = 0; o < outer; ++o) {
    for (long i = 0; i < n; ++i) {
      const long src_i = ((i - shift) % n + n) % n;
      const T* src = t.data() + (o * static_cast<std::size_t>(n) + static_cast<std::size_t>(src_i)) * inner;
      T* dst = out.data() + (o * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)) * inner;
      std::copy(src, src + inner, dst);
    }
  }
  return out;
}

template <typename T>
Tensor<T> translate(const Tensor<T>& t, int dx, int dy) {
  require_spatial(t, "translate");
  const long h = static_cast<long>(t.extent(0));
  const long w = static_cast<long>(t.extent(1));
  const std::size_t inner = inner_size(t.shape());
  Tensor<T> out(t.shape());
  for (long i = 0; i < h; ++i) {
    const long is = i - dy;
    if (is < 0 || is >= h) continue;
    for (long j = 0; j < w; ++j) {
      const long js = j - dx;
      if (js < 0 || js >= w) continue;
      const T* src = t.data() + static_cast<std::size_t>(is * w + js) * inner;
      std::copy(src, src + inner, out.data() + static_cast<std::size_t>(i * w + j) * inner);
    }
  }
  return out;
}

template <typename T>
Tensor<T> pad_to_odd(const Tensor<T>& t) {
  require_spatial(t, "pad_to_odd");
  const std::size_t h = t.extent(0), w = t.extent(1);
  if (h % 2 == 1 && w % 2 == 1) return t;
  Shape s = t.shape();
  s[0] = h | 1;
  s[1] = w | 1;
  const std::size_t inner = inner_size(s);
  Tensor<T> out(s);
  for (std::size_t i = 0; i < h; ++i) {
    std::copy(t.data() + i * w * inner, t.data() + (i + 1) * w * inner, out.data() + i * s[1] * inner);
  }
  return out;
}

#define RICNN_INSTANTIATE(T)                                                  \
  template class Tensor<T>;                                                   \
  template Tensor<T> hadamard(const Tensor<T>&, const Tensor<T>&);            \
  template void add_inplace(Tensor<T>&, const Tensor<T>&, T);                 \
  template double sum(const Tensor<T>&);                                      \
  template double max_abs(const Tensor<T>&);                                  \
  template double max_abs_diff(const Tensor<T>&, const Tensor<T>&);           \
  template Tensor<T> rot90(const Tensor<T>&, int);                            \
  template Tensor<T> circular_shift(const Tensor<T>&, std::size_t, long);     \
  template Tensor<T> translate(const Tensor<T>&, int, int);                   \
  template Tensor<T> pad_to_odd(const Tensor<T>&);

RICNN_INSTANTIATE(float)
RICNN_INSTANTIATE(double)

#undef RICNN_INSTANTIATE

}  // namespace ricnn
