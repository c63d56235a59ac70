#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccstat/image.hpp"

namespace ccstat {

/// Recovery angular error in degrees between two illuminant directions.
template <typename DerivedA, typename DerivedB>
double angular_error(const Eigen::MatrixBase<DerivedA>& estimate,
                     const Eigen::MatrixBase<DerivedB>& ground_truth) {
  const Eigen::Vector3d a = estimate.template cast<double>();
  const Eigen::Vector3d b = ground_truth.template cast<double>();
  const double norms = a.norm() * b.norm();
  if (!(norms > 0) || !std::isfinite(norms))
    throw std::invalid_argument("angular error needs finite nonzero vectors");
  // Same angle as acos of the clamped cosine, without its loss of precision
  // near 0 and 180 degrees.
  const double angle = std::atan2(a.cross(b).norm(), a.dot(b));
  return std::clamp(angle * 180.0 / std::numbers::pi, 0.0, 180.0);
}

/// Five-statistic accuracy report plus their geometric mean, in degrees.
struct ErrorSummary {
  double mean = 0;
  double median = 0;
  double trimean = 0;
  double best25 = 0;
  double worst25 = 0;
  double avg = 0;
  std::size_t count = 0;

  static std::string CsvHeader();
  std::string ToCsvRow() const;
};

/// One (tuple i, tuple j) comparison within a method: differences of the
/// green-chromaticity standard deviations and of the median angular errors.
struct DifferencePair {
  double delta_sigma = 0;
  double delta_median = 0;
};

/// Linear-interpolation quantile of an ascending-sorted sample, q in [0, 1].
double sorted_quantile(std::span<const double> sorted, double q);

ErrorSummary summarize(std::span<const double> errors);

/// Aligned text table with one row per (label, summary), columns in the order
/// Mean, Med., Tri., Best 25%, Worst 25%, Avg.
std::string format_summary_table(std::span<const std::pair<std::string, ErrorSummary>> rows);

/// Sample standard deviation (n - 1 denominator) of the green chromaticities.
double green_std(std::span<const Rgb<double>> estimates);

/// Sample standard deviation of each chromaticity component (r, g, b).
Eigen::Vector3d chromaticity_std(std::span<const Rgb<double>> estimates);

double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace ccstat
