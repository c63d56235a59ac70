#include "ccstat/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccstat/error.hpp"
#include "ccstat/parallel.hpp"

namespace ccstat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, 0.5);
}

/// First minimal criterion in grid order; throws if every entry was skipped.
TuningResult pick_minimum(std::vector<TuningLogEntry> log, const char* what) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (!log[i].criterion) continue;
    if (!best || *log[i].criterion < *log[*best].criterion) best = i;
  }
  if (!best) throw DegenerateError(std::string(what) + ": every grid tuple was skipped");
  TuningResult result;
  result.chosen = log[*best].tuple;
  result.criterion_value = *log[*best].criterion;
  result.per_tuple_log = std::move(log);
  return result;
}

}  // namespace

ParameterGrid::ParameterGrid(std::vector<ParameterTuple> tuples) : tuples_(std::move(tuples)) {
  if (tuples_.empty()) throw std::invalid_argument("parameter grid must not be empty");
  for (const auto& t : tuples_) t.Validate();
  std::sort(tuples_.begin(), tuples_.end());
  tuples_.erase(std::unique(tuples_.begin(), tuples_.end()), tuples_.end());
}

std::optional<std::size_t> ParameterGrid::find(const ParameterTuple& tuple) const {
  const auto it = std::lower_bound(tuples_.begin(), tuples_.end(), tuple);
  if (it == tuples_.end() || *it != tuple) return std::nullopt;
  return static_cast<std::size_t>(it - tuples_.begin());
}

GridValues GridValues::Default() {
  GridValues values;
  values.orders = {0, 1, 2};
  for (int p = 1; p <= 12; ++p) values.norms.push_back(p);
  values.norms.insert(values.norms.end(), {15.0, 20.0, std::numeric_limits<double>::infinity()});
  values.sigmas = {0, 1, 2, 3, 5, 7, 9};
  return values;
}

GridValues GridValues::ForFamily(MethodFamily family, const GridValues& base) {
  GridValues values = base;
  switch (family) {
    case MethodFamily::kGrayWorld:
      return {{0}, {1.0}, {0.0}};
    case MethodFamily::kWhitePatch:
      return {{0}, {std::numeric_limits<double>::infinity()}, {0.0}};
    case MethodFamily::kShadesOfGray:
      values.orders = {0};
      values.sigmas = {0.0};
      break;
    case MethodFamily::kGeneralGrayWorld:
      values.orders = {0};
      break;
    case MethodFamily::kGrayEdge1:
      values.orders = {1};
      break;
    case MethodFamily::kGrayEdge2:
      values.orders = {2};
      break;
  }
  return values;
}

ParameterGrid build_grid(const GridValues& values) {
  if (values.orders.empty() || values.norms.empty() || values.sigmas.empty())
    throw std::invalid_argument("grid value sets must not be empty");
  std::vector<ParameterTuple> tuples;
  for (int n : values.orders)
    for (double p : values.norms)
      for (double sigma : values.sigmas) tuples.push_back({n, MinkowskiNorm(p), sigma});
  return ParameterGrid(std::move(tuples));
}

EstimateTable estimate_grid(const ImageSet& images, const ParameterGrid& grid, int workers) {
  const std::size_t count = images.size();
  EstimateTable table;
  table.image_ids.reserve(count);
  for (std::size_t j = 0; j < count; ++j) table.image_ids.push_back(images.id(j));
  table.per_tuple.assign(grid.size(), Eigen::Matrix3Xd::Constant(3, static_cast<Eigen::Index>(count), kNaN));

  parallel_for(count, workers, [&](std::size_t j) {
    const Sample sample = images.load(j);
    const auto estimates = try_estimate_all(sample.image, sample.mask, grid.tuples());
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (estimates[i]) table.per_tuple[i].col(static_cast<Eigen::Index>(j)) = *estimates[i];
  });
  return table;
}

ErrorMatrix errors_from_estimates(const EstimateTable& estimates, const LabeledImageSet& truth) {
  const auto count = static_cast<Eigen::Index>(estimates.image_ids.size());
  if (static_cast<std::size_t>(count) != truth.size()) throw std::invalid_argument("estimate table and labels differ in size");
  ErrorMatrix result;
  result.image_ids = estimates.image_ids;
  result.errors.resize(static_cast<Eigen::Index>(estimates.per_tuple.size()), count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const Rgb<double>& gt = truth.ground_truth(static_cast<std::size_t>(j));
    for (std::size_t i = 0; i < estimates.per_tuple.size(); ++i) {
      const auto e = estimates.per_tuple[i].col(j);
      result.errors(static_cast<Eigen::Index>(i), j) = EstimateTable::missing(e) ? kNaN : angular_error(e, gt);
    }
  }
  return result;
}

ErrorMatrix evaluate_grid(const LabeledImageSet& images, const ParameterGrid& grid, int workers) {
  for (std::size_t j = 0; j < images.size(); ++j) images.ground_truth(j);
  return errors_from_estimates(estimate_grid(images, grid, workers), images);
}

TuningResult tune_supervised(const ErrorMatrix& errors, const ParameterGrid& grid, std::span<const Eigen::Index> columns) {
  if (static_cast<std::size_t>(errors.errors.rows()) != grid.size())
    throw std::invalid_argument("error matrix rows must match the grid");
  if (errors.errors.cols() == 0) throw std::invalid_argument("error matrix has no images");
  std::vector<Eigen::Index> all;
  if (columns.empty()) {
    all.resize(static_cast<std::size_t>(errors.errors.cols()));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    columns = all;
  }

  std::vector<TuningLogEntry> log;
  log.reserve(grid.size());
  std::vector<double> row;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    row.clear();
    TuningLogEntry entry{grid[i], std::nullopt, 0};
    for (Eigen::Index j : columns) {
      const double e = errors.errors(static_cast<Eigen::Index>(i), j);
      if (std::isnan(e)) {
        ++entry.zero_signal_count;
      } else {
        row.push_back(e);
      }
    }
    if (!row.empty()) entry.criterion = median_of(row);
    log.push_back(entry);
  }
  return pick_minimum(std::move(log), "supervised tuning");
}

CrossValidationResult cross_validate(const ErrorMatrix& errors, const FoldAssignment& folds, const ParameterGrid& grid) {
  folds.Validate(errors.image_ids);
  std::vector<std::vector<Eigen::Index>> members(folds.fold_count);
  for (std::size_t j = 0; j < errors.image_ids.size(); ++j)
    members[folds.fold_of.at(errors.image_ids[j])].push_back(static_cast<Eigen::Index>(j));

  CrossValidationResult result;
  for (int k = 0; k < folds.fold_count; ++k) {
    std::vector<Eigen::Index> training;
    for (int other = 0; other < folds.fold_count; ++other)
      if (other != k) training.insert(training.end(), members[other].begin(), members[other].end());
    std::sort(training.begin(), training.end());

    TuningResult tuned = tune_supervised(errors, grid, training);
    const auto row = static_cast<Eigen::Index>(*grid.find(tuned.chosen));
    for (Eigen::Index j : members[k]) {
      const double e = errors.errors(row, j);
      if (std::isnan(e)) {
        ++result.missing_count;
        continue;
      }
      result.test_ids.push_back(errors.image_ids[static_cast<std::size_t>(j)]);
      result.test_errors.push_back(e);
      result.test_folds.push_back(k);
    }
    result.per_fold.push_back(std::move(tuned));
  }
  return result;
}

CrossValidationResult cross_validate(const LabeledImageSet& images, const FoldAssignment& folds,
                                     const ParameterGrid& grid, int workers) {
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < images.size(); ++j) ids.push_back(images.id(j));
  folds.Validate(ids);
  return cross_validate(evaluate_grid(images, grid, workers), folds, grid);
}

std::optional<double> green_std_of(const Eigen::Matrix3Xd& estimates, std::size_t* zero_signal_count) {
  std::vector<Rgb<double>> present;
  present.reserve(static_cast<std::size_t>(estimates.cols()));
  for (Eigen::Index j = 0; j < estimates.cols(); ++j)
    if (!EstimateTable::missing(estimates.col(j))) present.emplace_back(estimates.col(j));
  const std::size_t missing = static_cast<std::size_t>(estimates.cols()) - present.size();
  if (zero_signal_count) *zero_signal_count = missing;
  if (2 * missing >= static_cast<std::size_t>(estimates.cols()) || present.size() < 2) return std::nullopt;
  return green_std(present);
}

TuningResult tune_green_stability(const EstimateTable& estimates, const ParameterGrid& grid) {
  if (estimates.per_tuple.size() != grid.size()) throw std::invalid_argument("estimate table must match the grid");
  if (estimates.image_ids.size() < 2) throw std::invalid_argument("green stability tuning needs at least two images");
  std::vector<TuningLogEntry> log;
  log.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    TuningLogEntry entry{grid[i], std::nullopt, 0};
    entry.criterion = green_std_of(estimates.per_tuple[i], &entry.zero_signal_count);
    log.push_back(entry);
  }
  return pick_minimum(std::move(log), "green stability tuning");
}

TuningResult tune_green_stability(const ImageSet& images, const ParameterGrid& grid, int workers) {
  if (images.size() < 2) throw std::invalid_argument("green stability tuning needs at least two images");
  return tune_green_stability(estimate_grid(images, grid, workers), grid);
}

std::vector<MethodGrid> default_method_grids(const GridValues& base) {
  std::vector<MethodGrid> methods;
  for (MethodFamily family : {MethodFamily::kShadesOfGray, MethodFamily::kGeneralGrayWorld, MethodFamily::kGrayEdge1,
                              MethodFamily::kGrayEdge2}) {
    methods.push_back({std::string(method_name(family)), build_grid(GridValues::ForFamily(family, base))});
  }
  return methods;
}

ParameterGrid merge_grids(std::span<const MethodGrid> methods) {
  std::vector<ParameterTuple> all;
  for (const auto& m : methods) all.insert(all.end(), m.grid.begin(), m.grid.end());
  return ParameterGrid(std::move(all));
}

std::vector<DifferencePair> difference_pairs(std::span<const MethodStatistics> methods) {
  std::vector<DifferencePair> pairs;
  for (const auto& m : methods) {
    if (m.green_stds.size() != m.medians.size()) throw std::invalid_argument("method statistics are inconsistent");
    for (std::size_t i = 0; i < m.green_stds.size(); ++i)
      for (std::size_t j = i + 1; j < m.green_stds.size(); ++j)
        pairs.push_back({m.green_stds[i] - m.green_stds[j], m.medians[i] - m.medians[j]});
  }
  return pairs;
}

std::vector<MethodStatistics> method_statistics(const EstimateTable& estimates, const ErrorMatrix& errors,
                                                const ParameterGrid& grid, std::span<const MethodGrid> methods,
                                                std::vector<std::string>* dropped) {
  std::vector<MethodStatistics> stats;
  for (const auto& method : methods) {
    MethodStatistics s;
    s.name = method.name;
    for (const auto& tuple : method.grid) {
      const auto index = grid.find(tuple);
      if (!index) throw std::invalid_argument("method tuple " + tuple.ToString() + " is not in the evaluated grid");
      const auto sigma = green_std_of(estimates.per_tuple[*index]);
      if (!sigma) continue;
      std::vector<double> present;
      for (double e : errors.errors.row(static_cast<Eigen::Index>(*index)))
        if (!std::isnan(e)) present.push_back(e);
      s.tuples.push_back(tuple);
      s.green_stds.push_back(*sigma);
      s.medians.push_back(median_of(std::move(present)));
    }
    if (s.tuples.size() < 2) {
      if (dropped) dropped->push_back(method.name);
      continue;
    }
    stats.push_back(std::move(s));
  }
  return stats;
}

CorrelationResult correlation_experiment(const LabeledImageSet& images, std::span<const MethodGrid> methods, int workers) {
  if (methods.empty()) throw std::invalid_argument("correlation experiment needs at least one method");
  for (std::size_t j = 0; j < images.size(); ++j) images.ground_truth(j);
  const ParameterGrid grid = merge_grids(methods);
  const EstimateTable estimates = estimate_grid(images, grid, workers);
  const ErrorMatrix errors = errors_from_estimates(estimates, images);

  CorrelationResult result;
  result.methods = method_statistics(estimates, errors, grid, methods, &result.dropped_methods);
  result.pairs = difference_pairs(result.methods);
  if (result.pairs.size() < 2) throw DegenerateError("correlation experiment produced fewer than two difference pairs");
  std::vector<double> xs, ys;
  for (const auto& p : result.pairs) {
    xs.push_back(p.delta_sigma);
    ys.push_back(p.delta_median);
  }
  result.coefficient = pearson(xs, ys);
  return result;
}

}  // namespace ccstat
