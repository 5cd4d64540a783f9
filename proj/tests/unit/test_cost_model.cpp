#include <gtest/gtest.h>

#include <random>

#include "hatk/cost_model.hpp"
#include "hatk/error.hpp"

using namespace hatk;

namespace {

// Grid with the given number of non-empty tiles in each query-block row; the
// first r_i tiles of row i are Partial.
BlockGrid grid_with_rows(const std::vector<std::size_t>& r, std::uint32_t b = 4) {
  const std::size_t rows = r.size();
  std::vector<BlockLabel> labels(rows * rows, BlockLabel::Empty);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < r[i]; ++j) labels[i * rows + j] = BlockLabel::Partial;
  }
  return BlockGrid::from_labels(rows * b, {b, b}, std::move(labels));
}

std::vector<std::size_t> random_rows(std::mt19937_64& rng, std::size_t rows) {
  std::uniform_int_distribution<std::size_t> d(0, rows);
  std::vector<std::size_t> r(rows);
  for (auto& x : r) x = d(rng);
  return r;
}

}  // namespace

TEST(CostModel, ClosedForm) {
  const auto g = grid_with_rows({1, 3, 0, 2});
  EXPECT_DOUBLE_EQ(estimate_time(g, {0.5, 2.0, 1.0}), 4 * 0.5 + 2.0 * 6);
  EXPECT_DOUBLE_EQ(estimate_time(g, {0.5, 2.0, 4.0}), (4 * 0.5 + 2.0 * 6) / 4);
  EXPECT_DOUBLE_EQ(estimate_time(g, {0.5, 2.0, 4.0}, 3), 3 * (4 * 0.5 + 2.0 * 6) / 4);
}

TEST(CostModel, PaddingRowsAreNotCtas) {
  // N = 10 with b = 4 gives three query-block rows, all containing real queries.
  std::vector<BlockLabel> labels(9, BlockLabel::Partial);
  const auto g = BlockGrid::from_labels(10, {4, 4}, labels);
  EXPECT_EQ(g.cta_rows(), 3u);
  EXPECT_DOUBLE_EQ(estimate_time(g, {1, 1, 1}), 3 + 9);
}

TEST(CostModel, DiagonalVersusDenseSpeedup) {
  // Four tiles per row against one tile per row, with no fixed overhead.
  const auto dense = grid_with_rows({4, 4, 4, 4});
  const auto diag = grid_with_rows({1, 1, 1, 1});
  EXPECT_EQ(predicted_speedup(dense, diag, {0, 1, 1}), 4.0);
  EXPECT_LT(predicted_speedup(dense, diag, {1, 1, 1}), 4.0);
}

TEST(CostModel, RejectsBadParameters) {
  const auto g = grid_with_rows({1, 1});
  EXPECT_THROW(estimate_time(g, {-1, 1, 1}), ValidationError);
  EXPECT_THROW(estimate_time(g, {0, 0, 1}), ValidationError);
  EXPECT_THROW(estimate_time(g, {0, 1, 0.5}), ValidationError);
  EXPECT_THROW(estimate_time(g, {0, 1, 1}, 0), ValidationError);
  EXPECT_THROW(predicted_speedup(g, grid_with_rows({1, 1, 1}), {0, 1, 1}), ValidationError);
}

// Adding a non-empty tile never makes the prediction faster.
TEST(CostModelProperty, MonotoneInNonEmptyTiles) {
  std::mt19937_64 rng(1);
  const CostParams params{0.3, 1.7, 2.0};
  for (int trial = 0; trial < 50; ++trial) {
    auto r = random_rows(rng, 8);
    const double before = estimate_time(grid_with_rows(r), params);
    std::size_t i = rng() % r.size();
    if (r[i] == r.size()) continue;
    ++r[i];
    EXPECT_GT(estimate_time(grid_with_rows(r), params), before);
  }
}

TEST(CostModelProperty, LinearInReplicas) {
  const auto g = grid_with_rows({2, 0, 3});
  const CostParams params{0.1, 0.7, 3.0};
  for (std::size_t k = 1; k < 10; ++k) EXPECT_NEAR(estimate_time(g, params, k), k * estimate_time(g, params), 1e-12);
}

TEST(Calibration, RecoversExactParameters) {
  const CostParams truth{3e-6, 7e-7, 4.0};
  std::mt19937_64 rng(2);
  std::vector<CostSample> samples;
  for (int i = 0; i < 12; ++i) {
    const auto g = grid_with_rows(random_rows(rng, 4 + i % 5));
    samples.push_back(CostSample::from_grid(g, estimate_time(g, truth, 3), 3));
  }
  const auto fit = calibrate(samples, truth.p_eff);
  EXPECT_NEAR(fit.params.alpha, truth.alpha, 1e-9 * truth.alpha);
  EXPECT_NEAR(fit.params.beta, truth.beta, 1e-9 * truth.beta);
  EXPECT_LT(fit.rms_residual, 1e-15);
  EXPECT_EQ(fit.residuals.size(), samples.size());
}

TEST(Calibration, ToleratesSmallNoise) {
  const CostParams truth{2.0, 0.5, 1.0};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<CostSample> samples;
  for (int i = 0; i < 200; ++i) {
    const auto g = grid_with_rows(random_rows(rng, 2 + i % 30));
    samples.push_back(CostSample::from_grid(g, estimate_time(g, truth) * (1 + noise(rng))));
  }
  const auto fit = calibrate(samples, 1.0);
  EXPECT_NEAR(fit.params.alpha, truth.alpha, 0.05 * truth.alpha);
  EXPECT_NEAR(fit.params.beta, truth.beta, 0.05 * truth.beta);
}

TEST(Calibration, RejectsUnderdeterminedSamples) {
  const std::vector<CostSample> two = {{1, 2, 3}, {2, 5, 7}};
  EXPECT_THROW(calibrate(two), UnfittableError);
  // R = 2M for every sample.
  const std::vector<CostSample> collinear = {{1, 2, 3}, {2, 4, 6}, {5, 10, 14}};
  EXPECT_THROW(calibrate(collinear), UnfittableError);
  const std::vector<CostSample> zero = {{0, 2, 3}, {0, 4, 6}, {0, 10, 14}};
  EXPECT_THROW(calibrate(zero), UnfittableError);
  const std::vector<CostSample> nan = {{1, 2, 3}, {2, 3, 6}, {5, 1, std::nan("")}};
  EXPECT_THROW(calibrate(nan), ValidationError);
}
