#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hatk/block_analysis.hpp"

namespace hatk {

/// Parameters of the CTA runtime model
///   T = sum_i (alpha + beta * r_i) / p_eff
/// with one CTA per query-block row and r_i its non-empty tile count.
struct CostParams {
  double alpha = 0;  ///< seconds of fixed overhead per CTA
  double beta = 1;   ///< seconds per non-empty tile
  double p_eff = 1;  ///< effective parallelism

  /// alpha >= 0, beta > 0, p_eff >= 1, all finite.
  void validate() const;
  friend bool operator==(const CostParams&, const CostParams&) = default;
};

/// Predicted runtime in seconds. `replicas` multiplies the CTA count for
/// (batch x heads) independent slices of the same pattern.
double estimate_time(const BlockGrid& grid, const CostParams& params, std::size_t replicas = 1);

/// estimate_time(a) / estimate_time(b): how many times faster b runs than a.
/// Both grids must cover the same N with the same block spec.
double predicted_speedup(const BlockGrid& a, const BlockGrid& b, const CostParams& params);

/// One timing observation: M CTAs, R non-empty tiles, measured seconds.
struct CostSample {
  double ctas = 0;
  double nonempty = 0;
  double seconds = 0;

  static CostSample from_grid(const BlockGrid& grid, double seconds, std::size_t replicas = 1);
};

struct Calibration {
  CostParams params;
  std::vector<double> residuals;  ///< measured - predicted, per sample
  double rms_residual = 0;
};

/// Least-squares fit of alpha and beta with p_eff held fixed. Throws
/// UnfittableError for fewer than 3 samples or collinear (M, R) pairs.
Calibration calibrate(std::span<const CostSample> samples, double p_eff = 1.0);

}  // namespace hatk
