#include "ricnn/geometry.hpp"

#include <cmath>
#include <numbers>

namespace ricnn {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// mu_n on centred integer coordinates.
std::pair<long, long> mu(int n, long x, long y) {
  switch (((n % 4) + 4) % 4) {
    case 1: return {-y, x};
    case 2: return {-x, -y};
    case 3: return {y, -x};
    default: return {x, y};
  }
}

void require_odd(std::size_t h, std::size_t w, const char* what) {
  if (h % 2 == 0 || w % 2 == 0) {
    throw ValidationError(std::string(what) + ": filter extents must be odd, got " + std::to_string(h) + "x" +
                          std::to_string(w));
  }
}

// Taps of a residual rotation by alpha in [0, pi/2) on an h x w grid.
std::vector<FilterRotation::Tap> residual_taps(std::size_t h, std::size_t w, double alpha, Interp scheme) {
  std::vector<FilterRotation::Tap> taps;
  const long ch = static_cast<long>(h - 1) / 2;
  const long cw = static_cast<long>(w - 1) / 2;
  auto in_support = [&](long x, long y) { return x >= -cw && x <= cw && y >= -ch && y <= ch; };
  auto index = [&](long x, long y) { return static_cast<std::uint32_t>((y + ch) * static_cast<long>(w) + (x + cw)); };

  if (alpha == 0.0) {
    taps.reserve(h * w);
    for (long y = -ch; y <= ch; ++y)
      for (long x = -cw; x <= cw; ++x) taps.push_back({index(x, y), index(x, y), 1.0});
    return taps;
  }

  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  for (long y = -ch; y <= ch; ++y) {
    for (long x = -cw; x <= cw; ++x) {
      // Back-rotate the output position into the source filter.
      const double qx = c * static_cast<double>(x) + s * static_cast<double>(y);
      const double qy = -s * static_cast<double>(x) + c * static_cast<double>(y);
      const auto dst = index(x, y);
      if (scheme == Interp::Nearest) {
        const long sx = std::lround(qx);
        const long sy = std::lround(qy);
        if (in_support(sx, sy)) taps.push_back({dst, index(sx, sy), 1.0});
        continue;
      }
      const double fx0 = std::floor(qx);
      const double fy0 = std::floor(qy);
      const long x0 = static_cast<long>(fx0);
      const long y0 = static_cast<long>(fy0);
      const double tx = qx - fx0;
      const double ty = qy - fy0;
      const double weights[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
      const long xs[4] = {x0, x0 + 1, x0, x0 + 1};
      const long ys[4] = {y0, y0, y0 + 1, y0 + 1};
      for (int k = 0; k < 4; ++k) {
        if (weights[k] != 0.0 && in_support(xs[k], ys[k])) taps.push_back({dst, index(xs[k], ys[k]), weights[k]});
      }
    }
  }
  return taps;
}

FilterRotation compose(std::size_t h, std::size_t w, int quarter_turns, double alpha, Interp scheme) {
  require_odd(h, w, "filter rotation");
  const int n = ((quarter_turns % 4) + 4) % 4;
  FilterRotation rot;
  rot.in_height = h;
  rot.in_width = w;
  rot.height = (n % 2 == 1) ? w : h;
  rot.width = (n % 2 == 1) ? h : w;
  rot.taps = residual_taps(h, w, alpha, scheme);
  if (n == 0) return rot;

  // out2(p) = out1(mu_{-n} p): the tap written at p1 moves to mu_n(p1).
  const long ch = static_cast<long>(h - 1) / 2;
  const long cw = static_cast<long>(w - 1) / 2;
  const long och = static_cast<long>(rot.height - 1) / 2;
  const long ocw = static_cast<long>(rot.width - 1) / 2;
  for (auto& tap : rot.taps) {
    const long x1 = static_cast<long>(tap.dst % w) - cw;
    const long y1 = static_cast<long>(tap.dst / w) - ch;
    const auto [x2, y2] = mu(n, x1, y1);
    tap.dst = static_cast<std::uint32_t>((y2 + och) * static_cast<long>(rot.width) + (x2 + ocw));
  }
  return rot;
}

}  // namespace

std::string to_string(const RegionLabel& label) {
  switch (label.kind) {
    case RegionKind::Cone: return "Cone(" + std::to_string(label.index) + ")";
    case RegionKind::Boundary: return "Boundary(" + std::to_string(label.index) + ")";
    case RegionKind::Origin: break;
  }
  return "Origin";
}

RegionLabel classify_point(long x, long y, int subdivisions) {
  if (subdivisions < 1) throw ValidationError("subdivisions must be >= 1");
  if (x == 0 && y == 0) return RegionLabel::origin();
  const int R = subdivisions;

  // Rotate into the half-open first quadrant {u > 0, v >= 0} with exact
  // integer quarter turns; q counts the turns removed.
  int q = 0;
  long u = x, v = y;
  while (!(u > 0 && v >= 0)) {
    const auto [nu, nv] = mu(3, u, v);  // mu_{-1}: angle decreases by pi/2
    u = nu;
    v = nv;
    ++q;
  }
  const int base = q * R;
  if (v == 0) return RegionLabel::boundary(base);
  if (R % 2 == 0 && u == v) return RegionLabel::boundary(base + R / 2);

  const double phi = std::atan2(static_cast<double>(v), static_cast<double>(u));
  int local = static_cast<int>(std::floor(phi * (2.0 * R) / std::numbers::pi));
  if (local < 0) local = 0;
  if (local > R - 1) local = R - 1;
  return RegionLabel::cone(base + local);
}

RegionMap::RegionMap(std::size_t size, int subdivisions) : size_(size), subdivisions_(subdivisions) {
  if (size == 0 || size % 2 == 0) {
    throw ValidationError("region map extent must be odd, got " + std::to_string(size));
  }
  if (subdivisions < 1) throw ValidationError("subdivisions must be >= 1");
  labels_.resize(size * size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j)
      labels_[i * size + j] = classify_point(centred(j, size), centred(i, size), subdivisions);
}

double RegionMap::angle(int r) const {
  return 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(4 * subdivisions_);
}

RegionMap build_region_map(std::size_t size, int subdivisions) { return RegionMap(size, subdivisions); }

std::string to_string(Interp scheme) { return scheme == Interp::Nearest ? "nearest" : "bilinear"; }

Interp parse_interp(const std::string& name) {
  if (name == "nearest") return Interp::Nearest;
  if (name == "bilinear") return Interp::Bilinear;
  throw ValidationError("unknown interpolation scheme '" + name + "'");
}

template <typename T>
Tensor<T> FilterRotation::apply(const Tensor<T>& w) const {
  if (w.rank() < 2 || w.extent(0) != in_height || w.extent(1) != in_width) {
    throw ValidationError("filter rotation built for " + std::to_string(in_height) + "x" +
                          std::to_string(in_width) + ", applied to " + to_string(w.shape()));
  }
  const std::size_t inner = w.size() / (w.extent(0) * w.extent(1));
  Shape s = w.shape();
  s[0] = height;
  s[1] = width;
  Tensor<T> out(s);
  for (const auto& tap : taps) {
    const T* src = w.data() + tap.src * inner;
    T* dst = out.data() + tap.dst * inner;
    const T wt = static_cast<T>(tap.weight);
    for (std::size_t c = 0; c < inner; ++c) dst[c] += wt * src[c];
  }
  return out;
}

template <typename T>
Tensor<T> FilterRotation::apply_adjoint(const Tensor<T>& g) const {
  if (g.rank() < 2 || g.extent(0) != height || g.extent(1) != width) {
    throw ValidationError("filter rotation adjoint: gradient shape " + to_string(g.shape()) + " mismatch");
  }
  const std::size_t inner = g.size() / (g.extent(0) * g.extent(1));
  Shape s = g.shape();
  s[0] = in_height;
  s[1] = in_width;
  Tensor<T> out(s);
  for (const auto& tap : taps) {
    const T* src = g.data() + tap.dst * inner;
    T* dst = out.data() + tap.src * inner;
    const T wt = static_cast<T>(tap.weight);
    for (std::size_t c = 0; c < inner; ++c) dst[c] += wt * src[c];
  }
  return out;
}

FilterRotation make_filter_rotation(std::size_t height, std::size_t width, double theta, Interp scheme) {
  const double q = theta / kHalfPi;
  const double nearest = std::round(q);
  if (std::abs(q - nearest) < 1e-9) return compose(height, width, static_cast<int>(nearest), 0.0, scheme);
  const double n = std::floor(q);
  return compose(height, width, static_cast<int>(n), theta - n * kHalfPi, scheme);
}

FilterRotation make_region_rotation(std::size_t height, std::size_t width, int r, int subdivisions,
                                    Interp scheme) {
  if (subdivisions < 1) throw ValidationError("subdivisions must be >= 1");
  const int rotations = 4 * subdivisions;
  r = ((r % rotations) + rotations) % rotations;
  const int n = r / subdivisions;
  const int s = r % subdivisions;
  const double alpha = s == 0 ? 0.0 : kHalfPi * static_cast<double>(s) / static_cast<double>(subdivisions);
  return compose(height, width, n, alpha, scheme);
}

template <typename T>
Tensor<T> rotate_filter(const Tensor<T>& w, double theta, Interp scheme) {
  if (w.rank() < 2) throw ValidationError("rotate_filter: need at least two spatial axes");
  return make_filter_rotation(w.extent(0), w.extent(1), theta, scheme).apply(w);
}

template Tensor<float> FilterRotation::apply(const Tensor<float>&) const;
template Tensor<double> FilterRotation::apply(const Tensor<double>&) const;
template Tensor<float> FilterRotation::apply_adjoint(const Tensor<float>&) const;
template Tensor<double> FilterRotation::apply_adjoint(const Tensor<double>&) const;
template Tensor<float> rotate_filter(const Tensor<float>&, double, Interp);
template Tensor<double> rotate_filter(const Tensor<double>&, double, Interp);

}  // namespace ricnn
