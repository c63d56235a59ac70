#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "ccstat/tuning.hpp"
#include "oracles.hpp"

namespace ccstat {
namespace {

const double kInf = std::numeric_limits<double>::infinity();

ParameterTuple tuple(int n, double p, double sigma) {
  return {n, std::isinf(p) ? MinkowskiNorm::Infinity() : MinkowskiNorm(p), sigma};
}

InMemoryImageSet small_synthetic(int count, std::uint64_t seed, int width = 20, int height = 16) {
  SyntheticSpec spec;
  spec.image_count = count;
  spec.width = width;
  spec.height = height;
  spec.min_patches = 3;
  spec.max_patches = 8;
  spec.noise = 0.01;
  spec.seed = seed;
  return to_image_set(synthesize_dataset(spec));
}

// Independent median: sort a copy and average the middle pair.
double plain_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

double direct_error(const InMemoryImageSet& set, std::size_t j, const ParameterTuple& t) {
  const auto& s = set.at(j);
  return angular_error(estimate(s.image, s.mask, t), s.ground_truth);
}

TEST(Grid, CartesianCounts) {
  EXPECT_EQ(build_grid({{1}, {1, 2}, {0, 1}}).size(), 4u);
  EXPECT_EQ(build_grid(GridValues::Default()).size(), 315u);
  EXPECT_EQ(build_grid({{0, 0, 1}, {2, 2, 1}, {0}}).size(), 4u);
  EXPECT_THROW(build_grid({{}, {1}, {0}}), std::invalid_argument);
  EXPECT_THROW(build_grid({{3}, {1}, {0}}), std::invalid_argument);
}

TEST(Grid, DocumentedOrder) {
  const auto grid = build_grid({{1, 0}, {kInf, 2, 1}, {1, 0}});
  std::vector<ParameterTuple> expected;
  for (int n : {0, 1})
    for (double p : {1.0, 2.0, kInf})
      for (double s : {0.0, 1.0}) expected.push_back(tuple(n, p, s));
  ASSERT_EQ(grid.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(grid[i], expected[i]);
  EXPECT_EQ(grid.find(tuple(1, kInf, 0)), std::optional<std::size_t>(10));
  EXPECT_FALSE(grid.find(tuple(2, 1, 0)).has_value());
}

TEST(Grid, SpecialCasesIncluded) {
  const auto grid = build_grid(GridValues::ForFamily(MethodFamily::kShadesOfGray));
  EXPECT_TRUE(grid.find(NamedMethod::GrayWorld().ToParameters()).has_value());
  EXPECT_TRUE(grid.find(NamedMethod::WhitePatch().ToParameters()).has_value());
  EXPECT_EQ(grid.size(), 15u);
  for (const auto& t : build_grid(GridValues::ForFamily(MethodFamily::kGrayEdge2))) EXPECT_EQ(t.order, 2);
}

TEST(EvaluateGrid, PerfectEstimate) {
  const auto image = LinearImage::Constant(4, 4, Eigen::Vector3d(0.2, 0.5, 0.3));
  InMemoryImageSet set({{"only", image, PixelMask::All(4, 4), Eigen::Vector3d(0.4, 1.0, 0.6)}});
  const auto m = evaluate_grid(set, ParameterGrid({tuple(0, 1, 0)}));
  ASSERT_EQ(m.errors.rows(), 1);
  ASSERT_EQ(m.errors.cols(), 1);
  EXPECT_NEAR(m.errors(0, 0), 0.0, 1e-12);
}

TEST(EvaluateGrid, MatchesPerCallComposition) {
  const auto set = small_synthetic(5, 3);
  const ParameterGrid grid({tuple(0, 1, 0), tuple(0, 4, 2), tuple(1, 2, 1), tuple(2, kInf, 3)});
  const auto m = evaluate_grid(set, grid, 2);
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < set.size(); ++j)
      EXPECT_EQ(m.errors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), direct_error(set, j, grid[i]));
}

TEST(EvaluateGrid, ZeroSignalIsMissing) {
  const auto flat = LinearImage::Constant(6, 6, Eigen::Vector3d(0.2, 0.5, 0.3));
  InMemoryImageSet set({{"flat", flat, PixelMask::All(6, 6), Eigen::Vector3d(1, 1, 1)}});
  const auto m = evaluate_grid(set, ParameterGrid({tuple(0, 1, 0), tuple(1, 1, 1)}));
  EXPECT_FALSE(std::isnan(m.errors(0, 0)));
  EXPECT_TRUE(std::isnan(m.errors(1, 0)));
  EXPECT_EQ(m.missing_count(), 1);
}

TEST(EvaluateGrid, WorkerCountDoesNotChangeResults) {
  const auto set = small_synthetic(9, 4);
  const auto grid = build_grid({{0, 1}, {1, 3, kInf}, {0, 2}});
  const auto one = evaluate_grid(set, grid, 1);
  for (int workers : {3, 8}) EXPECT_TRUE(one.errors.cwiseEqual(evaluate_grid(set, grid, workers).errors).all());
}

ErrorMatrix matrix(std::initializer_list<std::initializer_list<double>> rows) {
  ErrorMatrix m;
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  m.errors.resize(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m.errors(i, j++) = v;
    ++i;
  }
  for (Eigen::Index j = 0; j < c; ++j) m.image_ids.push_back("img" + std::to_string(j));
  return m;
}

TEST(TuneSupervised, DominantOptimum) {
  const ParameterGrid grid({tuple(0, 1, 0), tuple(0, 2, 0), tuple(0, 3, 0)});
  const auto m = matrix({{3, 4, 5}, {0, 0, 0}, {1, 1, 1}});
  const auto result = tune_supervised(m, grid);
  EXPECT_EQ(result.chosen, tuple(0, 2, 0));
  EXPECT_EQ(result.criterion_value, 0.0);
  ASSERT_EQ(result.per_tuple_log.size(), 3u);
  EXPECT_EQ(*result.per_tuple_log[0].criterion, 4.0);
}

TEST(TuneSupervised, TieGoesToEarlierTuple) {
  const ParameterGrid grid({tuple(0, 1, 0), tuple(0, 2, 0), tuple(0, 3, 0)});
  const auto m = matrix({{5, 5, 5}, {1, 2, 9}, {2, 2, 0}});
  EXPECT_EQ(tune_supervised(m, grid).chosen, tuple(0, 2, 0));
}

TEST(TuneSupervised, SkipsAllMissingRows) {
  const double nan = std::nan("");
  const ParameterGrid grid({tuple(0, 1, 0), tuple(0, 2, 0)});
  const auto m = matrix({{nan, nan}, {3, 4}});
  const auto result = tune_supervised(m, grid);
  EXPECT_EQ(result.chosen, tuple(0, 2, 0));
  EXPECT_FALSE(result.per_tuple_log[0].criterion.has_value());
  EXPECT_EQ(result.per_tuple_log[0].zero_signal_count, 2u);
  EXPECT_THROW(tune_supervised(matrix({{nan, nan}, {nan, nan}}), grid), DegenerateError);
}

TEST(TuneSupervised, EqualsBruteForceRescan) {
  const auto set = small_synthetic(20, 5);
  const auto grid = build_grid({{0, 1}, {1, 2, 6, 12, kInf}, {0}});
  ASSERT_EQ(grid.size(), 10u);
  const auto result = tune_supervised(evaluate_grid(set, grid), grid);

  std::size_t best = 0;
  double best_median = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> errors;
    for (std::size_t j = 0; j < set.size(); ++j) errors.push_back(direct_error(set, j, grid[i]));
    const double m = plain_median(errors);
    if (m < best_median) {
      best_median = m;
      best = i;
    }
  }
  EXPECT_EQ(result.chosen, grid[best]);
  EXPECT_DOUBLE_EQ(result.criterion_value, best_median);
}

TEST(CrossValidate, UniformOptimum) {
  const ParameterGrid grid({tuple(0, 1, 0), tuple(0, 2, 0), tuple(0, 3, 0)});
  const auto m = matrix({{1, 2, 3, 4, 5, 6}, {0, 0, 0, 0, 0, 0}, {0.5, 0.1, 7, 0, 1, 1}});
  const auto folds = round_robin_folds(m.image_ids, 3);
  const auto cv = cross_validate(m, folds, grid);
  ASSERT_EQ(cv.per_fold.size(), 3u);
  for (const auto& fold : cv.per_fold) EXPECT_EQ(fold.chosen, tuple(0, 2, 0));
  ASSERT_EQ(cv.test_errors.size(), 6u);
  for (double e : cv.test_errors) EXPECT_EQ(e, 0.0);
}

TEST(CrossValidate, MatchesScriptedLoop) {
  const auto set = small_synthetic(30, 6);
  const auto grid = build_grid({{0, 1}, {1, 2, 4, 8, kInf}, {0, 1}});
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < set.size(); ++j) ids.push_back(set.id(j));
  const auto folds = round_robin_folds(ids, 3);
  const auto cv = cross_validate(set, folds, grid, 2);

  std::vector<std::vector<double>> direct(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < set.size(); ++j) direct[i].push_back(direct_error(set, j, grid[i]));

  std::vector<std::string> expected_ids;
  std::vector<double> expected_errors;
  for (int k = 0; k < 3; ++k) {
    std::size_t best = 0;
    double best_median = kInf;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<double> train;
      for (std::size_t j = 0; j < set.size(); ++j)
        if (static_cast<int>(j % 3) != k) train.push_back(direct[i][j]);
      const double m = plain_median(train);
      if (m < best_median) best_median = m, best = i;
    }
    EXPECT_EQ(cv.per_fold[static_cast<std::size_t>(k)].chosen, grid[best]) << "fold " << k;
    for (std::size_t j = 0; j < set.size(); ++j)
      if (static_cast<int>(j % 3) == k) {
        expected_ids.push_back(ids[j]);
        expected_errors.push_back(direct[best][j]);
      }
  }
  EXPECT_EQ(cv.test_ids, expected_ids);
  EXPECT_EQ(cv.test_errors, expected_errors);
  EXPECT_EQ(cv.missing_count, 0u);
}

TEST(CrossValidate, TestFoldDoesNotInfluenceItsTuple) {
  const auto grid = ParameterGrid({tuple(0, 1, 0), tuple(0, 2, 0), tuple(0, 3, 0)});
  auto m = matrix({{1, 1, 1, 9, 9, 9}, {2, 2, 2, 2, 2, 2}, {3, 3, 3, 0, 0, 0}});
  FoldAssignment folds = round_robin_folds(m.image_ids, 2);
  const auto before = cross_validate(m, folds, grid);
  // Rewrite every fold-0 test error; fold 0's choice must not move.
  for (Eigen::Index j = 0; j < 6; j += 2) m.errors.col(j).setConstant(50.0);
  const auto after = cross_validate(m, folds, grid);
  EXPECT_EQ(before.per_fold[0].chosen, after.per_fold[0].chosen);
  EXPECT_EQ(before.per_fold[0].criterion_value, after.per_fold[0].criterion_value);
}

TEST(CrossValidate, UnknownImageInFolds) {
  const auto m = matrix({{1, 2, 3}});
  FoldAssignment folds;
  folds.fold_count = 2;
  folds.fold_of = {{"img0", 0}, {"img1", 1}, {"stranger", 1}};
  EXPECT_THROW(cross_validate(m, folds, ParameterGrid({tuple(0, 1, 0)})), DataError);
}

TEST(GreenStability, SingletonGrid) {
  const auto set = small_synthetic(4, 7);
  const ParameterGrid grid({tuple(1, 6, 2)});
  const ImageSet& unlabeled = set;
  EXPECT_EQ(tune_green_stability(unlabeled, grid).chosen, tuple(1, 6, 2));
}

TEST(GreenStability, EqualsBruteForceArgmin) {
  const auto set = small_synthetic(40, 8);
  const auto grid = build_grid({{0, 1, 2}, {1, 4, kInf}, {0, 2}});
  std::vector<ParameterTuple> picked(grid.begin(), grid.end());
  picked.resize(12);
  const ParameterGrid twelve(picked);
  const auto result = tune_green_stability(static_cast<const ImageSet&>(set), twelve, 3);

  std::size_t best = 0;
  double best_sigma = kInf;
  for (std::size_t i = 0; i < twelve.size(); ++i) {
    std::vector<double> g;
    for (std::size_t j = 0; j < set.size(); ++j) {
      const auto& s = set.at(j);
      const auto e = estimate(s.image, s.mask, twelve[i]);
      g.push_back(e[1] / (e[0] + e[1] + e[2]));
    }
    const double sigma = oracle::two_pass_std(g);
    EXPECT_NEAR(*result.per_tuple_log[i].criterion, sigma, 1e-12);
    if (sigma < best_sigma) best_sigma = sigma, best = i;
  }
  EXPECT_EQ(result.chosen, twelve[best]);
}

TEST(GreenStability, SkipsMostlyZeroSignalTuples) {
  const auto flat = LinearImage::Constant(8, 8, Eigen::Vector3d(0.2, 0.5, 0.3));
  std::mt19937_64 rng(9);
  std::vector<LabeledSample> samples;
  samples.push_back({"a", flat, PixelMask::All(8, 8), Eigen::Vector3d(1, 1, 1)});
  samples.push_back({"b", flat, PixelMask::All(8, 8), Eigen::Vector3d(1, 1, 1)});
  samples.push_back({"c", oracle::random_image(rng, 8, 8), PixelMask::All(8, 8), Eigen::Vector3d(1, 1, 1)});
  samples.push_back({"d", oracle::random_image(rng, 8, 8), PixelMask::All(8, 8), Eigen::Vector3d(1, 1, 1)});
  const InMemoryImageSet set(std::move(samples));
  const ParameterGrid grid({tuple(0, 2, 0), tuple(1, 2, 1)});
  const auto result = tune_green_stability(static_cast<const ImageSet&>(set), grid);
  EXPECT_EQ(result.chosen, tuple(0, 2, 0));
  EXPECT_FALSE(result.per_tuple_log[1].criterion.has_value());
  EXPECT_EQ(result.per_tuple_log[1].zero_signal_count, 2u);
  EXPECT_THROW(tune_green_stability(static_cast<const ImageSet&>(set), ParameterGrid({tuple(1, 2, 1)})),
               DegenerateError);
}

TEST(Correlation, PairCounts) {
  std::vector<MethodStatistics> methods = {{"a", {}, {1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}},
                                           {"b", {}, {0.1, 0.2, 0.4}, {1, 2, 4}}};
  const auto pairs = difference_pairs(methods);
  EXPECT_EQ(pairs.size(), 10u + 3u);
  EXPECT_DOUBLE_EQ(pairs[0].delta_sigma, -1.0);
  EXPECT_DOUBLE_EQ(pairs[0].delta_median, 1.0);
}

TEST(Correlation, ExperimentCountsAndLinearity) {
  const auto set = small_synthetic(8, 10);
  std::vector<MethodGrid> methods = {{"sog", build_grid({{0}, {1, 2, 4, 8}, {0}})},
                                     {"ge1", build_grid({{1}, {1, 2, 6}, {1}})}};
  const auto result = correlation_experiment(set, methods, 2);
  EXPECT_EQ(result.pairs.size(), 6u + 3u);
  EXPECT_TRUE(result.dropped_methods.empty());
  EXPECT_GE(result.coefficient, -1.0);
  EXPECT_LE(result.coefficient, 1.0);

  std::vector<double> xs, ys;
  for (const auto& p : result.pairs) {
    xs.push_back(p.delta_sigma);
    ys.push_back(3 * p.delta_sigma + 0.25);
  }
  EXPECT_NEAR(pearson(xs, ys), 1.0, 1e-12);
}

TEST(Correlation, SinglePairIsDegenerate) {
  const auto set = small_synthetic(5, 11);
  std::vector<MethodGrid> methods = {{"sog", build_grid({{0}, {1, 2}, {0}})}};
  EXPECT_THROW(correlation_experiment(set, methods), DegenerateError);
}

TEST(Correlation, DefaultMethodsCoverTheGrid) {
  const auto methods = default_method_grids();
  ASSERT_EQ(methods.size(), 4u);
  EXPECT_EQ(methods[0].grid.size(), 15u);
  EXPECT_EQ(merge_grids(methods).size(), methods[0].grid.size() + methods[1].grid.size() - 15 +
                                             methods[2].grid.size() + methods[3].grid.size());
}

}  // namespace
}  // namespace ccstat
