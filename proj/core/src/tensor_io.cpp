#include "ricnn/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ricnn {

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts need byte swapping");

namespace {

constexpr char kTensorMagic[4] = {'R', 'T', 'N', 'S'};
constexpr char kLabelMagic[4] = {'R', 'L', 'B', 'L'};
constexpr std::uint8_t kVersion = 1;

template <typename V>
void put(std::ostream& os, V v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V get(std::istream& is, const char* what) {
  V v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(V))) {
    throw IoError(std::string("truncated file while reading ") + what);
  }
  return v;
}

void expect_magic(std::istream& is, const char (&magic)[4]) {
  char buf[4];
  if (!is.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) {
    throw IoError(std::string("bad magic, expected ") + std::string(magic, 4));
  }
}

template <typename Src, typename T>
void read_payload(std::istream& is, Tensor<T>& out) {
  std::vector<Src> buf(out.size());
  if (!is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(Src)))) {
    throw IoError("truncated tensor payload");
  }
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = static_cast<T>(buf[i]);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

template <typename T>
void write_tensor(std::ostream& os, const Tensor<T>& t) {
  os.write(kTensorMagic, 4);
  put<std::uint8_t>(os, kVersion);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(dtype_of<T>()));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(t.rank()));
  for (auto e : t.shape()) put<std::uint32_t>(os, static_cast<std::uint32_t>(e));
  os.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(T)));
  if (!os) throw IoError("failed writing tensor");
}

template <typename T>
Tensor<T> read_tensor(std::istream& is) {
  expect_magic(is, kTensorMagic);
  const auto version = get<std::uint8_t>(is, "version");
  if (version != kVersion) throw IoError("unsupported tensor version " + std::to_string(version));
  const auto dtype = get<std::uint8_t>(is, "dtype");
  if (dtype > 1) throw IoError("unknown dtype " + std::to_string(dtype));
  const auto rank = get<std::uint8_t>(is, "rank");
  Shape shape(rank);
  for (auto& e : shape) {
    e = get<std::uint32_t>(is, "extent");
    if (e == 0) throw IoError("zero extent in tensor header");
  }
  Tensor<T> out(shape);
  if (dtype == 0) {
    read_payload<float>(is, out);
  } else {
    read_payload<double>(is, out);
  }
  return out;
}

template <typename T>
void save_tensor(const std::filesystem::path& path, const Tensor<T>& t) {
  auto out = open_out(path);
  try {
    write_tensor(out, t);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

template <typename T>
Tensor<T> load_tensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_tensor<T>(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

DType peek_dtype(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    expect_magic(in, kTensorMagic);
    get<std::uint8_t>(in, "version");
    const auto dtype = get<std::uint8_t>(in, "dtype");
    if (dtype > 1) throw IoError("unknown dtype " + std::to_string(dtype));
    return static_cast<DType>(dtype);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_labels(const std::filesystem::path& path, const std::vector<std::uint32_t>& labels) {
  auto out = open_out(path);
  out.write(kLabelMagic, 4);
  put<std::uint8_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size() * sizeof(std::uint32_t)));
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::uint32_t> load_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    expect_magic(in, kLabelMagic);
    const auto version = get<std::uint8_t>(in, "version");
    if (version != kVersion) throw IoError("unsupported label version " + std::to_string(version));
    const auto count = get<std::uint32_t>(in, "count");
    std::vector<std::uint32_t> labels(count);
    if (!in.read(reinterpret_cast<char*>(labels.data()),
                 static_cast<std::streamsize>(labels.size() * sizeof(std::uint32_t)))) {
      throw IoError("truncated label payload");
    }
    return labels;
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

template void write_tensor(std::ostream&, const Tensor<float>&);
template void write_tensor(std::ostream&, const Tensor<double>&);
template Tensor<float> read_tensor(std::istream&);
template Tensor<double> read_tensor(std::istream&);
template void save_tensor(const std::filesystem::path&, const Tensor<float>&);
template void save_tensor(const std::filesystem::path&, const Tensor<double>&);
template Tensor<float> load_tensor(const std::filesystem::path&);
template Tensor<double> load_tensor(const std::filesystem::path&);

}  // namespace ricnn
