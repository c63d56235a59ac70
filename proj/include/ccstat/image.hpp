#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "ccstat/error.hpp"

namespace ccstat {

/// Row-major plane of samples, indexed (y, x).
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Rgb = Eigen::Matrix<Scalar, 3, 1>;

enum Channel : int { kRed = 0, kGreen = 1, kBlue = 2 };

/// Three-plane linear-intensity raster. Immutable once constructed; every
/// sample is finite and nonnegative.
template <typename Scalar = double>
class Image {
 public:
  using PlaneType = Plane<Scalar>;

  Image(std::array<PlaneType, 3> planes, Scalar white_level)
      : planes_(std::move(planes)), white_level_(white_level) {
    Validate();
  }

  /// Width x height image filled with a constant color.
  static Image Constant(int width, int height, const Rgb<Scalar>& color,
                        Scalar white_level = Scalar(1)) {
    std::array<PlaneType, 3> planes;
    for (int c = 0; c < 3; ++c) planes[c] = PlaneType::Constant(height, width, color[c]);
    return Image(std::move(planes), white_level);
  }

  int width() const { return static_cast<int>(planes_[0].cols()); }
  int height() const { return static_cast<int>(planes_[0].rows()); }
  Eigen::Index pixel_count() const { return planes_[0].size(); }
  Scalar white_level() const { return white_level_; }

  const PlaneType& channel(int c) const { return planes_[c]; }
  const std::array<PlaneType, 3>& planes() const { return planes_; }

  Rgb<Scalar> pixel(int x, int y) const {
    return Rgb<Scalar>(planes_[0](y, x), planes_[1](y, x), planes_[2](y, x));
  }

  /// Per-channel gains applied to every pixel (the diagonal illumination model).
  Image Scaled(const Rgb<Scalar>& gains) const {
    std::array<PlaneType, 3> planes;
    for (int c = 0; c < 3; ++c) planes[c] = planes_[c] * gains[c];
    return Image(std::move(planes), white_level_);
  }

  template <typename Other>
  Image<Other> Cast() const {
    std::array<Plane<Other>, 3> planes;
    for (int c = 0; c < 3; ++c) planes[c] = planes_[c].template cast<Other>();
    return Image<Other>(std::move(planes), static_cast<Other>(white_level_));
  }

  bool operator==(const Image& other) const {
    if (width() != other.width() || height() != other.height()) return false;
    if (white_level_ != other.white_level_) return false;
    for (int c = 0; c < 3; ++c)
      if ((planes_[c] != other.planes_[c]).any()) return false;
    return true;
  }

 private:
  void Validate() const {
    const auto rows = planes_[0].rows();
    const auto cols = planes_[0].cols();
    if (rows < 1 || cols < 1) throw DataError("image must be at least 1x1");
    for (const auto& plane : planes_) {
      if (plane.rows() != rows || plane.cols() != cols)
        throw DataError("image planes differ in size");
      if (!plane.isFinite().all() || (plane < Scalar(0)).any())
        throw DataError("image samples must be finite and nonnegative");
    }
    if (!(white_level_ > Scalar(0)) || !std::isfinite(static_cast<double>(white_level_)))
      throw DataError("white level must be positive");
  }

  std::array<PlaneType, 3> planes_;
  Scalar white_level_;
};

using LinearImage = Image<double>;

/// Per-pixel inclusion flags, indexed (y, x). A usable mask includes at least
/// one pixel; IncludedCount() is cheap enough to check on demand.
class PixelMask {
 public:
  using Flags = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  explicit PixelMask(Flags included) : included_(std::move(included)) {}

  static PixelMask All(int width, int height) {
    return PixelMask(Flags::Constant(height, width, true));
  }

  int width() const { return static_cast<int>(included_.cols()); }
  int height() const { return static_cast<int>(included_.rows()); }
  bool included(int x, int y) const { return included_(y, x); }
  const Flags& flags() const { return included_; }
  Eigen::Index IncludedCount() const { return included_.count(); }

  template <typename Scalar>
  bool Matches(const Image<Scalar>& image) const {
    return width() == image.width() && height() == image.height();
  }

  bool operator==(const PixelMask& other) const {
    return included_.rows() == other.included_.rows() &&
           included_.cols() == other.included_.cols() && (included_ == other.included_).all();
  }

 private:
  Flags included_;
};

struct Chromaticity {
  double r = 0;
  double g = 0;
  double b = 0;
};

template <typename Derived>
Chromaticity to_chromaticity(const Eigen::MatrixBase<Derived>& e) {
  const double sum = static_cast<double>(e.sum());
  if ((e.array() < 0).any() || !(sum > 0))
    throw std::invalid_argument("chromaticity needs a nonnegative vector with a positive component");
  return {static_cast<double>(e[0]) / sum, static_cast<double>(e[1]) / sum,
          static_cast<double>(e[2]) / sum};
}

struct MaskThresholds {
  double saturation_fraction = 0.98;
  double dark_level = 0.0;
};

/// Combines an optional user mask with clipping and darkness exclusions.
/// A pixel is dropped if any channel reaches saturation_fraction * white_level
/// or if every channel is at or below dark_level.
template <typename Scalar>
PixelMask effective_mask(const Image<Scalar>& image, const std::optional<PixelMask>& mask,
                         const MaskThresholds& thresholds = {}) {
  if (!(thresholds.saturation_fraction > 0 && thresholds.saturation_fraction <= 1))
    throw std::invalid_argument("saturation fraction must lie in (0, 1]");
  if (!(thresholds.dark_level >= 0)) throw std::invalid_argument("dark level must be >= 0");
  if (mask && !mask->Matches(image)) throw DataError("mask dimensions differ from image");

  const Scalar clip = static_cast<Scalar>(thresholds.saturation_fraction) * image.white_level();
  const Scalar dark = static_cast<Scalar>(thresholds.dark_level);
  const auto& r = image.channel(kRed);
  const auto& g = image.channel(kGreen);
  const auto& b = image.channel(kBlue);

  PixelMask::Flags keep = (r < clip) && (g < clip) && (b < clip);
  keep = keep && ((r > dark) || (g > dark) || (b > dark));
  if (mask) keep = keep && mask->flags();
  if (!keep.any()) throw DataError("mask excludes every pixel");
  return PixelMask(std::move(keep));
}

}  // namespace ccstat
