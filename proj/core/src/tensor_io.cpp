#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "hatk/error.hpp"
#include "hatk/tensor.hpp"

namespace hatk {

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.numel()) throw ValidationError("tensor data does not match its shape");
}

template <typename T>
bool Tensor4<T>::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](T x) { return std::isfinite(x); });
}

template <typename T>
Tensor4<T> random_tensor(Shape4 shape, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor4<T> t(shape);
  for (auto& x : t.data()) x = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
double max_abs_diff(const Tensor4<T>& a, const Tensor4<T>& b) {
  if (!(a.shape() == b.shape())) throw ValidationError("max_abs_diff: shape mismatch");
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(a.data()[i]) - static_cast<double>(b.data()[i])));
  }
  return worst;
}

template class Tensor4<float>;
template class Tensor4<double>;
template Tensor4<float> random_tensor<float>(Shape4, std::mt19937_64&, double, double);
template Tensor4<double> random_tensor<double>(Shape4, std::mt19937_64&, double, double);
template double max_abs_diff<float>(const Tensor4<float>&, const Tensor4<float>&);
template double max_abs_diff<double>(const Tensor4<double>&, const Tensor4<double>&);

namespace {

constexpr std::array<char, 4> kMagic = {'H', 'A', 'T', 'K'};

template <typename U>
void put_le(std::ostream& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  static_assert(std::is_unsigned_v<U>);
  std::array<unsigned char, sizeof(U)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw ValidationError("tensor file truncated");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

template <typename F>
using bits_of = std::conditional_t<sizeof(F) == 4, std::uint32_t, std::uint64_t>;

template <typename F>
void put_payload(std::ostream& out, const std::vector<F>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(F)));
  } else {
    for (F v : values) put_le(out, std::bit_cast<bits_of<F>>(v));
  }
}

template <typename F>
std::vector<F> get_payload(std::istream& in, std::size_t count) {
  std::vector<F> values(count);
  if constexpr (std::endian::native == std::endian::little) {
    if (!in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(F)))) {
      throw ValidationError("tensor file truncated");
    }
  } else {
    for (auto& v : values) v = std::bit_cast<F>(get_le<bits_of<F>>(in));
  }
  return values;
}

}  // namespace

void write_tensor(std::ostream& out, const TensorFile& tensor) {
  if (tensor.dims.size() > 255) throw ValidationError("tensor rank exceeds 255");
  std::uint64_t numel = 1;
  for (auto d : tensor.dims) numel *= d;
  const std::size_t stored = std::visit([](const auto& v) { return v.size(); }, tensor.payload);
  if (numel != stored) throw ValidationError("tensor payload does not match its dims");

  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out, kTensorFileVersion);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.dtype()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_le<std::uint64_t>(out, d);
  std::visit([&out](const auto& v) { put_payload(out, v); }, tensor.payload);
  if (!out) throw ValidationError("failed to write tensor");
}

TensorFile read_tensor(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ValidationError("not a tensor file (bad magic)");
  }
  const auto version = get_le<std::uint16_t>(in);
  if (version != kTensorFileVersion) {
    throw ValidationError("unsupported tensor file version " + std::to_string(version));
  }
  const auto code = get_le<std::uint8_t>(in);
  const auto rank = get_le<std::uint8_t>(in);
  TensorFile t;
  std::uint64_t numel = 1;
  for (unsigned i = 0; i < rank; ++i) {
    t.dims.push_back(get_le<std::uint64_t>(in));
    numel *= t.dims.back();
  }
  if (numel > (std::uint64_t{1} << 34)) throw ValidationError("tensor file claims an implausible size");
  switch (static_cast<DType>(code)) {
    case DType::F32: t.payload = get_payload<float>(in, numel); break;
    case DType::F64: t.payload = get_payload<double>(in, numel); break;
    default: throw ValidationError("unknown tensor dtype code " + std::to_string(code));
  }
  return t;
}

void save_tensor(const std::string& path, const TensorFile& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  write_tensor(out, tensor);
}

TensorFile load_tensor(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return read_tensor(in);
}

template <typename T>
TensorFile to_file(const Tensor4<T>& t) {
  const auto& s = t.shape();
  TensorFile f;
  f.dims = {s.batch, s.heads, s.tokens, s.dim};
  f.payload = std::vector<T>(t.data().begin(), t.data().end());
  return f;
}

template <typename T>
Tensor4<T> from_file(const TensorFile& file) {
  if (file.dims.size() != 4) throw ValidationError("expected a rank-4 tensor");
  const auto* values = std::get_if<std::vector<T>>(&file.payload);
  if (values == nullptr) throw ValidationError("tensor file dtype does not match");
  return Tensor4<T>(Shape4{file.dims[0], file.dims[1], file.dims[2], file.dims[3]}, *values);
}

template TensorFile to_file<float>(const Tensor4<float>&);
template TensorFile to_file<double>(const Tensor4<double>&);
template Tensor4<float> from_file<float>(const TensorFile&);
template Tensor4<double> from_file<double>(const TensorFile&);

}  // namespace hatk
