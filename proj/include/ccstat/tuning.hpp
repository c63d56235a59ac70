#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccstat/dataset.hpp"
#include "ccstat/estimators.hpp"
#include "ccstat/metrics.hpp"

namespace ccstat {

/// Sorted, duplicate-free list of parameter tuples: by order, then p
/// (infinity last), then sigma.
class ParameterGrid {
 public:
  explicit ParameterGrid(std::vector<ParameterTuple> tuples);

  std::size_t size() const { return tuples_.size(); }
  const ParameterTuple& operator[](std::size_t i) const { return tuples_[i]; }
  std::span<const ParameterTuple> tuples() const { return tuples_; }
  auto begin() const { return tuples_.begin(); }
  auto end() const { return tuples_.end(); }

  /// Index of `tuple`, if present.
  std::optional<std::size_t> find(const ParameterTuple& tuple) const;

 private:
  std::vector<ParameterTuple> tuples_;
};

/// Value sets whose Cartesian product forms a grid. Infinity is written as
/// std::numeric_limits<double>::infinity() in `norms`.
struct GridValues {
  std::vector<int> orders;
  std::vector<double> norms;
  std::vector<double> sigmas;

  /// n in {0, 1, 2}, p in {1..12, 15, 20, inf}, sigma in {0, 1, 2, 3, 5, 7, 9}.
  static GridValues Default();
  /// The slice of `base` a method family explores (e.g. Shades-of-Gray fixes
  /// n = 0 and sigma = 0).
  static GridValues ForFamily(MethodFamily family, const GridValues& base = Default());
};

ParameterGrid build_grid(const GridValues& values);

/// Estimates for every (tuple, image) pair: `per_tuple[i]` holds one column per
/// image; a column of NaN marks an all-zero (ZeroSignal) estimate.
struct EstimateTable {
  std::vector<std::string> image_ids;
  std::vector<Eigen::Matrix3Xd> per_tuple;

  static bool missing(const Eigen::Ref<const Eigen::Vector3d>& e) { return std::isnan(e[0]); }
};

EstimateTable estimate_grid(const ImageSet& images, const ParameterGrid& grid, int workers = 1);

/// Angular errors, one row per tuple and one column per image; NaN marks a
/// ZeroSignal estimate.
struct ErrorMatrix {
  std::vector<std::string> image_ids;
  Eigen::MatrixXd errors;

  Eigen::Index missing_count() const { return errors.array().isNaN().count(); }
};

ErrorMatrix errors_from_estimates(const EstimateTable& estimates, const LabeledImageSet& truth);
ErrorMatrix evaluate_grid(const LabeledImageSet& images, const ParameterGrid& grid, int workers = 1);

struct TuningLogEntry {
  ParameterTuple tuple;
  /// Absent when the tuple was skipped.
  std::optional<double> criterion;
  /// Images whose estimate was all-zero under this tuple.
  std::size_t zero_signal_count = 0;
};

struct TuningResult {
  ParameterTuple chosen;
  double criterion_value = 0;
  std::vector<TuningLogEntry> per_tuple_log;
};

/// Picks the tuple with the lowest median angular error over the given image
/// columns (all columns when empty). Missing errors are left out of that
/// tuple's median; tuples with no errors at all are skipped. First minimum wins.
TuningResult tune_supervised(const ErrorMatrix& errors, const ParameterGrid& grid,
                             std::span<const Eigen::Index> columns = {});

struct CrossValidationResult {
  /// Test-fold errors of every image, concatenated fold by fold.
  std::vector<std::string> test_ids;
  std::vector<double> test_errors;
  std::vector<int> test_folds;
  /// Per fold, the tuning outcome on the remaining folds.
  std::vector<TuningResult> per_fold;
  /// Test images whose chosen tuple produced a ZeroSignal estimate.
  std::size_t missing_count = 0;
};

CrossValidationResult cross_validate(const ErrorMatrix& errors, const FoldAssignment& folds,
                                     const ParameterGrid& grid);
CrossValidationResult cross_validate(const LabeledImageSet& images, const FoldAssignment& folds,
                                     const ParameterGrid& grid, int workers = 1);

/// Green-chromaticity standard deviation of one tuple's estimates, or nullopt
/// if at least half of them are ZeroSignal (or fewer than two remain).
std::optional<double> green_std_of(const Eigen::Matrix3Xd& estimates, std::size_t* zero_signal_count = nullptr);

/// Unsupervised tuning: argmin over the grid of the estimates' green
/// chromaticity standard deviation. Never reads ground truth.
TuningResult tune_green_stability(const EstimateTable& estimates, const ParameterGrid& grid);
TuningResult tune_green_stability(const ImageSet& images, const ParameterGrid& grid, int workers = 1);

/// A named sub-grid evaluated as one method in the correlation experiment.
struct MethodGrid {
  std::string name;
  ParameterGrid grid;
};

/// Default method set: Shades-of-Gray (covering Gray-world and White-patch),
/// general Gray-world, and first- and second-order Gray-edge.
std::vector<MethodGrid> default_method_grids(const GridValues& base = GridValues::Default());

struct MethodStatistics {
  std::string name;
  std::vector<ParameterTuple> tuples;
  /// Green-chromaticity standard deviation and median angular error per tuple.
  std::vector<double> green_stds;
  std::vector<double> medians;
};

/// All i < j difference pairs within each method, pooled in method order.
std::vector<DifferencePair> difference_pairs(std::span<const MethodStatistics> methods);

struct CorrelationResult {
  std::vector<MethodStatistics> methods;
  std::vector<DifferencePair> pairs;
  double coefficient = 0;
  /// Methods dropped for having fewer than two usable tuples.
  std::vector<std::string> dropped_methods;
};

/// Builds per-method statistics from an error matrix and the matching estimate
/// table over `grid`, which must contain every method's tuples.
std::vector<MethodStatistics> method_statistics(const EstimateTable& estimates, const ErrorMatrix& errors,
                                                const ParameterGrid& grid, std::span<const MethodGrid> methods,
                                                std::vector<std::string>* dropped = nullptr);

CorrelationResult correlation_experiment(const LabeledImageSet& images, std::span<const MethodGrid> methods,
                                         int workers = 1);

/// Union of several grids.
ParameterGrid merge_grids(std::span<const MethodGrid> methods);

}  // namespace ccstat
