#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hatk {

/// (batch, heads, tokens, head_dim)
struct Shape4 {
  std::size_t batch = 1;
  std::size_t heads = 1;
  std::size_t tokens = 1;
  std::size_t dim = 1;

  std::size_t numel() const noexcept { return batch * heads * tokens * dim; }
  std::size_t slices() const noexcept { return batch * heads; }
  friend constexpr bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense row-major 4D array.
template <typename T>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, T fill = T{}) : shape_(shape), data_(shape.numel(), fill) {}
  Tensor4(Shape4 shape, std::vector<T> data);

  const Shape4& shape() const noexcept { return shape_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::size_t offset(std::size_t b, std::size_t h, std::size_t n, std::size_t d = 0) const noexcept {
    return ((b * shape_.heads + h) * shape_.tokens + n) * shape_.dim + d;
  }
  T& at(std::size_t b, std::size_t h, std::size_t n, std::size_t d) noexcept { return data_[offset(b, h, n, d)]; }
  const T& at(std::size_t b, std::size_t h, std::size_t n, std::size_t d) const noexcept {
    return data_[offset(b, h, n, d)];
  }

  /// head_dim-long vector of token n in slice (b, h).
  std::span<T> row(std::size_t b, std::size_t h, std::size_t n) noexcept {
    return {data_.data() + offset(b, h, n), shape_.dim};
  }
  std::span<const T> row(std::size_t b, std::size_t h, std::size_t n) const noexcept {
    return {data_.data() + offset(b, h, n), shape_.dim};
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor4&, const Tensor4&) = default;

 private:
  Shape4 shape_;
  std::vector<T> data_;
};

/// Fills a tensor with uniform values in [lo, hi) from a seeded engine.
template <typename T>
Tensor4<T> random_tensor(Shape4 shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0);

template <typename T>
double max_abs_diff(const Tensor4<T>& a, const Tensor4<T>& b);

// Binary tensor file: "HATK" magic, u16 version, u8 dtype code, u8 rank,
// rank little-endian u64 dims, then the row-major little-endian payload.

enum class DType : std::uint8_t { F32 = 1, F64 = 2 };

inline constexpr std::uint16_t kTensorFileVersion = 1;

struct TensorFile {
  std::vector<std::uint64_t> dims;
  std::variant<std::vector<float>, std::vector<double>> payload;

  DType dtype() const noexcept { return payload.index() == 0 ? DType::F32 : DType::F64; }
  friend bool operator==(const TensorFile&, const TensorFile&) = default;
};

void write_tensor(std::ostream& out, const TensorFile& tensor);
/// Throws ValidationError on bad magic, unknown version or dtype, or a
/// truncated payload.
TensorFile read_tensor(std::istream& in);

void save_tensor(const std::string& path, const TensorFile& tensor);
TensorFile load_tensor(const std::string& path);

template <typename T>
TensorFile to_file(const Tensor4<T>& t);
/// Throws ValidationError unless the file holds a rank-4 tensor of type T.
template <typename T>
Tensor4<T> from_file(const TensorFile& file);

}  // namespace hatk
