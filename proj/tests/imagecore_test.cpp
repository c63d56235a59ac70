#include <gtest/gtest.h>

#include <random>

#include "ccstat/filters.hpp"
#include "ccstat/image.hpp"
#include "oracles.hpp"

namespace ccstat {
namespace {

LinearImage ramp_x(int width, int height) {
  std::array<Plane<double>, 3> planes;
  for (auto& plane : planes) {
    plane.resize(height, width);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) plane(y, x) = x;
  }
  return LinearImage(std::move(planes), 255.0);
}

TEST(Image, RejectsInvalidSamples) {
  std::array<Plane<double>, 3> planes;
  for (auto& p : planes) p = Plane<double>::Constant(2, 2, 1.0);
  planes[1](0, 0) = -1.0;
  EXPECT_THROW(LinearImage(planes, 1.0), DataError);
  planes[1](0, 0) = std::nan("");
  EXPECT_THROW(LinearImage(planes, 1.0), DataError);
  planes[1](0, 0) = 0.0;
  EXPECT_THROW(LinearImage(planes, 0.0), DataError);
  planes[2] = Plane<double>::Constant(3, 2, 1.0);
  EXPECT_THROW(LinearImage(planes, 1.0), DataError);
}

TEST(Chromaticity, Examples) {
  const auto gray = to_chromaticity(Eigen::Vector3d(1, 1, 1));
  EXPECT_DOUBLE_EQ(gray.r, 1.0 / 3);
  EXPECT_DOUBLE_EQ(gray.g, 1.0 / 3);
  EXPECT_DOUBLE_EQ(gray.b, 1.0 / 3);
  const auto axis = to_chromaticity(Eigen::Vector3d(2, 0, 0));
  EXPECT_EQ(axis.r, 1.0);
  EXPECT_EQ(axis.g, 0.0);
  const auto unit = to_chromaticity(Eigen::Vector3d(0.4, 0.5, 0.1));
  EXPECT_NEAR(unit.r, 0.4, 1e-15);
  EXPECT_NEAR(unit.g, 0.5, 1e-15);
  EXPECT_NEAR(unit.b, 0.1, 1e-15);
  EXPECT_THROW(to_chromaticity(Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

TEST(Chromaticity, ScaleInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.01, 10);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d e(u(rng), u(rng), u(rng));
    const double k = u(rng);
    const auto a = to_chromaticity(e);
    const auto b = to_chromaticity(Eigen::Vector3d(k * e));
    EXPECT_NEAR(a.r, b.r, 1e-12);
    EXPECT_NEAR(a.g, b.g, 1e-12);
    EXPECT_NEAR(a.b, b.b, 1e-12);
    EXPECT_NEAR(a.r + a.g + a.b, 1.0, 1e-9);
  }
}

TEST(EffectiveMask, NoExclusions) {
  std::mt19937_64 rng(1);
  const LinearImage image(oracle::random_image(rng, 8, 6, 0.5).planes(), 1.0);
  const PixelMask mask = effective_mask(image, std::nullopt, {0.98, 0.0});
  EXPECT_EQ(mask.IncludedCount(), 48);
}

TEST(EffectiveMask, SaturatedPixelExcluded) {
  LinearImage base = LinearImage::Constant(4, 4, Eigen::Vector3d(10, 20, 30), 255.0);
  auto planes = base.planes();
  planes[kGreen](2, 1) = 255.0;
  const LinearImage image(planes, 255.0);
  const PixelMask mask = effective_mask(image, std::nullopt, {0.98, 0.0});
  EXPECT_EQ(mask.IncludedCount(), 15);
  EXPECT_FALSE(mask.included(1, 2));
}

TEST(EffectiveMask, MatchesPerPixelLoop) {
  std::mt19937_64 rng(11);
  const auto image = oracle::random_image(rng, 16, 16, 100.0);
  PixelMask::Flags user(16, 16);
  std::bernoulli_distribution keep(0.8);
  for (Eigen::Index i = 0; i < user.size(); ++i) user.data()[i] = keep(rng);
  const MaskThresholds t{0.9, 15.0};
  const PixelMask mask = effective_mask(image, PixelMask(user), t);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      const auto px = image.pixel(x, y);
      bool expected = user(y, x);
      for (int c = 0; c < 3; ++c)
        if (px[c] >= 0.9 * 100.0) expected = false;
      if (px[0] <= 15.0 && px[1] <= 15.0 && px[2] <= 15.0) expected = false;
      EXPECT_EQ(mask.included(x, y), expected) << x << "," << y;
    }
}

TEST(EffectiveMask, MonotoneInInputMask) {
  std::mt19937_64 rng(5);
  const auto image = oracle::random_image(rng, 12, 10, 1.0);
  PixelMask::Flags big = PixelMask::Flags::Constant(10, 12, true);
  std::bernoulli_distribution drop(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    PixelMask::Flags small = big;
    for (Eigen::Index i = 0; i < small.size(); ++i)
      if (drop(rng)) small.data()[i] = false;
    const auto a = effective_mask(image, PixelMask(big), {0.95, 0.05});
    if ((small && a.flags()).count() == 0) break;
    const auto b = effective_mask(image, PixelMask(small), {0.95, 0.05});
    EXPECT_FALSE((b.flags() && !a.flags()).any());
    EXPECT_LE(b.IncludedCount(), a.IncludedCount());
    big = small;
  }
}

TEST(EffectiveMask, Errors) {
  const auto image = LinearImage::Constant(3, 3, Eigen::Vector3d(0, 0, 0), 1.0);
  EXPECT_THROW(effective_mask(image, std::nullopt, {0.98, 0.0}), DataError);
  const auto lit = LinearImage::Constant(3, 3, Eigen::Vector3d(0.5, 0.5, 0.5), 1.0);
  EXPECT_THROW(effective_mask(lit, std::nullopt, {0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(effective_mask(lit, PixelMask::All(2, 3), {}), DataError);
}

TEST(GaussianSmooth, SigmaZeroIsIdentity) {
  std::mt19937_64 rng(3);
  const auto image = oracle::random_image(rng, 9, 7);
  EXPECT_TRUE(gaussian_smooth(image, 0.0) == image);
}

TEST(GaussianSmooth, ConstantStaysConstant) {
  const auto image = LinearImage::Constant(11, 8, Eigen::Vector3d(0.2, 3.0, 70.0), 100.0);
  for (double sigma : {0.5, 1.0, 2.5, 9.0}) {
    const auto out = gaussian_smooth(image, sigma);
    for (int c = 0; c < 3; ++c)
      EXPECT_LE(((out.channel(c) - image.channel(c)).abs() / image.channel(c)).maxCoeff(), 1e-9);
  }
}

TEST(GaussianSmooth, ImpulseMatchesDirectKernel) {
  Plane<double> impulse = Plane<double>::Zero(9, 9);
  impulse(4, 4) = 1.0;
  const LinearImage image({impulse, impulse, impulse}, 1.0);
  const auto out = gaussian_smooth(image, 1.0);
  const auto kernel = oracle::gaussian_2d(1.0);
  for (int dy = -3; dy <= 3; ++dy)
    for (int dx = -3; dx <= 3; ++dx) EXPECT_NEAR(out.channel(0)(4 + dy, 4 + dx), kernel[dy + 3][dx + 3], 1e-6);
}

TEST(GaussianSmooth, MatchesDirect2DConvolution) {
  std::mt19937_64 rng(21);
  const auto image = oracle::random_image(rng, 13, 10);
  for (double sigma : {0.7, 2.0, 5.0}) {  // sigma 5 needs multiple reflections
    const auto out = gaussian_smooth(image, sigma);
    const auto reference = oracle::correlate_2d(image.channel(1), oracle::gaussian_2d(sigma));
    EXPECT_LE((out.channel(1) - reference).abs().maxCoeff(), 1e-9) << sigma;
  }
}

TEST(GaussianSmooth, PreservesChannelMean) {
  std::mt19937_64 rng(8);
  const auto image = oracle::random_image(rng, 20, 15, 1000.0);
  for (double sigma : {1.0, 3.0, 9.0}) {
    const auto out = gaussian_smooth(image, sigma);
    for (int c = 0; c < 3; ++c) {
      const double before = image.channel(c).mean();
      EXPECT_NEAR(out.channel(c).mean(), before, 1e-6 * before) << sigma;
    }
  }
}

TEST(DerivativeMagnitude, ConstantGivesExactZero) {
  const auto image = LinearImage::Constant(10, 9, Eigen::Vector3d(0.3, 0.7, 11.0), 20.0);
  for (int order : {1, 2})
    for (double sigma : {0.0, 0.5, 1.0, 3.0, 7.0}) {
      const auto out = derivative_magnitude(image, order, sigma);
      for (int c = 0; c < 3; ++c) EXPECT_EQ(out.channel(c).abs().maxCoeff(), 0.0) << order << " " << sigma;
    }
}

TEST(DerivativeMagnitude, UnitRampGradient) {
  const auto image = ramp_x(10, 6);
  const auto out = derivative_magnitude(image, 1, 0.0);
  for (int y = 1; y < 5; ++y)
    for (int x = 1; x < 9; ++x) EXPECT_DOUBLE_EQ(out.channel(0)(y, x), 1.0);
}

TEST(DerivativeMagnitude, GaussianRampGradientIsExactInInterior) {
  const auto image = ramp_x(30, 20);
  const auto out = derivative_magnitude(image, 1, 2.0);
  for (int y = 0; y < 20; ++y)
    for (int x = 7; x < 23; ++x) EXPECT_NEAR(out.channel(2)(y, x), 1.0, 1e-12);
}

TEST(DerivativeMagnitude, MatchesExplicitKernels) {
  std::mt19937_64 rng(99);
  const auto image = oracle::random_image(rng, 16, 16);
  for (double sigma : {1.0, 2.0}) {
    const auto g0 = oracle::derivative_taps(sigma, 0);
    const auto g1 = oracle::derivative_taps(sigma, 1);
    const auto g2 = oracle::derivative_taps(sigma, 2);
    const auto first = derivative_magnitude(image, 1, sigma);
    const auto second = derivative_magnitude(image, 2, sigma);
    for (int c = 0; c < 3; ++c) {
      const auto& f = image.channel(c);
      const auto fx = oracle::correlate_2d(f, oracle::outer(g0, g1));
      const auto fy = oracle::correlate_2d(f, oracle::outer(g1, g0));
      const Plane<double> mag1 = (fx.square() + fy.square()).sqrt();
      EXPECT_LE((first.channel(c) - mag1).abs().maxCoeff(), 1e-6);

      const auto fxx = oracle::correlate_2d(f, oracle::outer(g0, g2));
      const auto fyy = oracle::correlate_2d(f, oracle::outer(g2, g0));
      const auto fxy = oracle::correlate_2d(f, oracle::outer(g1, g1));
      const Plane<double> mag2 = (fxx.square() + 4 * fxy.square() + fyy.square()).sqrt();
      EXPECT_LE((second.channel(c) - mag2).abs().maxCoeff(), 1e-6);
    }
  }
}

TEST(DerivativeMagnitude, CentralDifferencesAtSigmaZero) {
  std::mt19937_64 rng(4);
  const auto image = oracle::random_image(rng, 7, 6);
  const auto first = derivative_magnitude(image, 1, 0.0);
  const auto second = derivative_magnitude(image, 2, 0.0);
  const auto& f = image.channel(0);
  auto at = [&](int y, int x) { return f(oracle::mirror(y, 6), oracle::mirror(x, 7)); };
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 7; ++x) {
      const double fx = (at(y, x + 1) - at(y, x - 1)) / 2, fy = (at(y + 1, x) - at(y - 1, x)) / 2;
      EXPECT_NEAR(first.channel(0)(y, x), std::hypot(fx, fy), 1e-12);
      const double fxx = at(y, x + 1) - 2 * at(y, x) + at(y, x - 1);
      const double fyy = at(y + 1, x) - 2 * at(y, x) + at(y - 1, x);
      const double fxy = (at(y + 1, x + 1) - at(y + 1, x - 1) - at(y - 1, x + 1) + at(y - 1, x - 1)) / 4;
      EXPECT_NEAR(second.channel(0)(y, x), std::sqrt(fxx * fxx + 4 * fxy * fxy + fyy * fyy), 1e-12);
    }
}

TEST(DerivativeMagnitude, Preconditions) {
  const auto image = LinearImage::Constant(4, 4, Eigen::Vector3d(1, 1, 1));
  EXPECT_THROW(derivative_magnitude(image, 0, 1.0), std::invalid_argument);
  EXPECT_THROW(derivative_magnitude(image, 3, 1.0), std::invalid_argument);
  EXPECT_THROW(gaussian_smooth(image, -1.0), std::invalid_argument);
}

TEST(Image, FloatScalarWorks) {
  std::mt19937_64 rng(2);
  const auto image = oracle::random_image(rng, 12, 12).Cast<float>();
  const auto smooth = gaussian_smooth(image, 1.0);
  const auto reference = gaussian_smooth(image.Cast<double>(), 1.0);
  EXPECT_LE((smooth.channel(0).cast<double>() - reference.channel(0)).abs().maxCoeff(), 1e-5);
}

}  // namespace
}  // namespace ccstat
