#include "hatk/cost_model.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "hatk/error.hpp"

namespace hatk {

void CostParams::validate() const {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(p_eff)) {
    throw ValidationError("cost parameters must be finite");
  }
  if (alpha < 0) throw ValidationError("alpha must be >= 0");
  if (beta <= 0) throw ValidationError("beta must be > 0");
  if (p_eff < 1) throw ValidationError("p_eff must be >= 1");
}

double estimate_time(const BlockGrid& grid, const CostParams& params, std::size_t replicas) {
  params.validate();
  if (replicas == 0) throw ValidationError("replicas must be >= 1");
  double sum = 0;
  for (std::size_t i = 0; i < grid.cta_rows(); ++i) {
    sum += params.alpha + params.beta * static_cast<double>(grid.row_nonempty(i));
  }
  return static_cast<double>(replicas) * sum / params.p_eff;
}

double predicted_speedup(const BlockGrid& a, const BlockGrid& b, const CostParams& params) {
  if (a.tokens() != b.tokens() || !(a.block_spec() == b.block_spec())) {
    throw ValidationError("speedup needs grids with the same N and block spec");
  }
  return estimate_time(a, params) / estimate_time(b, params);
}

CostSample CostSample::from_grid(const BlockGrid& grid, double seconds, std::size_t replicas) {
  return {static_cast<double>(grid.cta_rows() * replicas), static_cast<double>(grid.nonempty() * replicas),
          seconds};
}

Calibration calibrate(std::span<const CostSample> samples, double p_eff) {
  if (samples.size() < 3) {
    throw UnfittableError("calibration needs at least 3 samples, got " + std::to_string(samples.size()));
  }
  if (!(p_eff >= 1) || !std::isfinite(p_eff)) throw ValidationError("p_eff must be >= 1");

  // seconds * p_eff = alpha * M + beta * R
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design(rows, 2);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (!std::isfinite(s.ctas) || !std::isfinite(s.nonempty) || !std::isfinite(s.seconds)) {
      throw ValidationError("calibration sample " + std::to_string(i) + " is not finite");
    }
    design(i, 0) = s.ctas;
    design(i, 1) = s.nonempty;
    target(i) = s.seconds * p_eff;
  }
  // Column scaling keeps the rank test meaningful when M and R differ in
  // magnitude by orders.
  const Eigen::Vector2d norms = design.colwise().norm().transpose();
  if (norms(0) == 0 || norms(1) == 0) throw UnfittableError("calibration samples have an all-zero column");
  const Eigen::MatrixXd scaled = design * norms.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < 2) throw UnfittableError("calibration samples are collinear in (M, R)");
  const Eigen::Vector2d coeffs = qr.solve(target).cwiseQuotient(norms);

  Calibration out;
  out.params = {coeffs(0), coeffs(1), p_eff};
  const Eigen::VectorXd predicted = design * coeffs / p_eff;
  double ss = 0;
  out.residuals.reserve(samples.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double r = samples[static_cast<std::size_t>(i)].seconds - predicted(i);
    out.residuals.push_back(r);
    ss += r * r;
  }
  out.rms_residual = std::sqrt(ss / static_cast<double>(rows));
  return out;
}

}  // namespace hatk
