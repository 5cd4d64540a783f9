#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "hatk/error.hpp"
#include "hatk/tensor.hpp"

using namespace hatk;

namespace {

std::string encode(const TensorFile& t) {
  std::ostringstream out(std::ios::binary);
  write_tensor(out, t);
  return out.str();
}

TensorFile decode(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_tensor(in);
}

}  // namespace

TEST(TensorFormat, HeaderLayout) {
  const TensorFile t{{2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6}};
  const std::string b = encode(t);
  ASSERT_EQ(b.size(), 4u + 2 + 1 + 1 + 2 * 8 + 6 * 4);
  EXPECT_EQ(b.substr(0, 4), "HATK");
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(b[5]), 0);
  EXPECT_EQ(static_cast<unsigned char>(b[6]), static_cast<unsigned char>(DType::F32));
  EXPECT_EQ(static_cast<unsigned char>(b[7]), 2);  // rank
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 2);  // first dim, low byte first
  EXPECT_EQ(static_cast<unsigned char>(b[16]), 3);
  // 1.0f is 0x3f800000.
  EXPECT_EQ(static_cast<unsigned char>(b[24]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(b[27]), 0x3f);
}

TEST(TensorFormat, RoundTripBothTypes) {
  std::mt19937_64 rng(1);
  const auto d = random_tensor<double>({2, 3, 5, 4}, rng);
  const auto f = random_tensor<float>({1, 2, 7, 3}, rng);
  EXPECT_EQ(from_file<double>(decode(encode(to_file(d)))), d);
  EXPECT_EQ(from_file<float>(decode(encode(to_file(f)))), f);
  const TensorFile scalar{{}, std::vector<double>{42.0}};
  EXPECT_EQ(decode(encode(scalar)), scalar);
}

TEST(TensorFormat, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "hatk_tensor_io_test.bin").string();
  const TensorFile t{{3}, std::vector<double>{-1.5, 0.0, 2.25}};
  save_tensor(path, t);
  EXPECT_EQ(load_tensor(path), t);
  std::filesystem::remove(path);
  EXPECT_THROW(load_tensor(path), ValidationError);
}

TEST(TensorFormat, RejectsCorruptHeaders) {
  const std::string good = encode({{2}, std::vector<double>{1, 2}});
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode(bad), ValidationError);
  bad = good;
  bad[4] = 9;
  EXPECT_THROW(decode(bad), ValidationError);
  bad = good;
  bad[6] = 7;
  EXPECT_THROW(decode(bad), ValidationError);
  EXPECT_THROW(decode(good.substr(0, good.size() - 1)), ValidationError);
  EXPECT_THROW(decode(good.substr(0, 10)), ValidationError);
  EXPECT_THROW(decode(""), ValidationError);
}

TEST(TensorFormat, TypedLoadChecksRankAndType) {
  EXPECT_THROW(from_file<double>({{2, 2}, std::vector<double>(4)}), ValidationError);
  EXPECT_THROW(from_file<float>({{1, 1, 1, 2}, std::vector<double>(2)}), ValidationError);
  EXPECT_NO_THROW(from_file<double>({{1, 1, 1, 2}, std::vector<double>(2)}));
}

TEST(Tensor4, MaxAbsDiffAndFinite) {
  Tensor4<double> a({1, 1, 2, 2}, 1.0), b({1, 1, 2, 2}, 1.0);
  b.at(0, 0, 1, 1) = -0.5;
  EXPECT_EQ(max_abs_diff(a, b), 1.5);
  EXPECT_TRUE(a.all_finite());
  a.at(0, 0, 0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(a.all_finite());
  EXPECT_THROW(max_abs_diff(a, Tensor4<double>({1, 1, 1, 1})), ValidationError);
}

TEST(Tensor4, RandomIsSeeded) {
  std::mt19937_64 r1(9), r2(9);
  EXPECT_EQ(random_tensor<float>({1, 2, 3, 4}, r1), random_tensor<float>({1, 2, 3, 4}, r2));
}
