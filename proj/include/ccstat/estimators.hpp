#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccstat/error.hpp"
#include "ccstat/filters.hpp"
#include "ccstat/image.hpp"

namespace ccstat {

/// Minkowski norm exponent p in [1, inf]. Infinity is an explicit state and is
/// never used as an exponent.
class MinkowskiNorm {
 public:
  explicit MinkowskiNorm(double p = 1.0) : p_(p) {
    if (!(p >= 1.0)) throw std::invalid_argument("Minkowski norm must be >= 1");
  }
  static MinkowskiNorm Infinity() { return MinkowskiNorm(std::numeric_limits<double>::infinity()); }

  bool is_infinite() const { return std::isinf(p_); }
  double value() const { return p_; }

  auto operator<=>(const MinkowskiNorm&) const = default;

 private:
  double p_;
};

/// Estimator configuration (derivative order, Minkowski norm, smoothing scale).
///   (0, 1, 0) Gray-world        (0, inf, 0) White-patch
///   (0, p, 0) Shades-of-Gray    (0, p, s)   general Gray-world
///   (n >= 1, p, s) Gray-edge
/// Ordering is by order, then p (infinity last), then sigma.
struct ParameterTuple {
  int order = 0;
  MinkowskiNorm norm{1.0};
  double sigma = 0.0;

  void Validate() const {
    if (order < 0 || order > 2) throw std::invalid_argument("derivative order must be 0, 1 or 2");
    if (!(sigma >= 0) || std::isinf(sigma)) throw std::invalid_argument("sigma must be finite and >= 0");
  }

  auto operator<=>(const ParameterTuple&) const = default;

  /// "n=1,p=6,sigma=2" / "n=0,p=inf,sigma=0".
  std::string ToString() const;
  /// Inverse of ToString; keys may appear in any order, missing keys default.
  static ParameterTuple Parse(std::string_view text);
};

std::string format_number(double value);
double parse_number(std::string_view text);

/// Named members of the estimator family.
enum class MethodFamily {
  kGrayWorld,
  kWhitePatch,
  kShadesOfGray,
  kGeneralGrayWorld,
  kGrayEdge1,
  kGrayEdge2,
};

std::string_view method_name(MethodFamily family);
MethodFamily parse_method(std::string_view name);

struct NamedMethod {
  MethodFamily family = MethodFamily::kGrayWorld;
  double p = 1.0;
  double sigma = 0.0;

  static NamedMethod GrayWorld() { return {MethodFamily::kGrayWorld}; }
  static NamedMethod WhitePatch() { return {MethodFamily::kWhitePatch}; }
  static NamedMethod ShadesOfGray(double p) { return {MethodFamily::kShadesOfGray, p}; }
  static NamedMethod GeneralGrayWorld(double p, double sigma) {
    return {MethodFamily::kGeneralGrayWorld, p, sigma};
  }
  static NamedMethod GrayEdge1(double p, double sigma) { return {MethodFamily::kGrayEdge1, p, sigma}; }
  static NamedMethod GrayEdge2(double p, double sigma) { return {MethodFamily::kGrayEdge2, p, sigma}; }

  ParameterTuple ToParameters() const;
};

namespace detail {

/// x^p for p >= 1; integral exponents up to 64 use exact-order repeated
/// squaring, which is both faster and reproducible.
inline double minkowski_power(double x, double p) {
  if (p == std::floor(p) && p <= 64.0) {
    auto n = static_cast<unsigned>(p);
    double result = 1.0;
    double base = x;
    while (n) {
      if (n & 1u) result *= base;
      n >>= 1u;
      if (n) base *= base;
    }
    return result;
  }
  return std::pow(x, p);
}

}  // namespace detail

/// Minkowski pooling of a response raster over the included pixels. Returns
/// nullopt when every channel pools to zero.
///
/// Finite p is evaluated on the channel divided by its masked maximum and
/// rescaled after the root, so large exponents on 16-bit ranges stay in range.
template <typename Scalar>
std::optional<Rgb<Scalar>> try_pool(const Image<Scalar>& response, const PixelMask& mask,
                                    const MinkowskiNorm& norm) {
  if (!mask.Matches(response)) throw std::invalid_argument("mask dimensions differ from image");
  const Eigen::Index count = mask.IncludedCount();
  if (count == 0) throw std::invalid_argument("mask excludes every pixel");

  const bool* include = mask.flags().data();
  const Eigen::Index size = response.pixel_count();
  Rgb<Scalar> pooled;
  for (int c = 0; c < 3; ++c) {
    const Scalar* sample = response.channel(c).data();
    Scalar peak = 0;
    for (Eigen::Index i = 0; i < size; ++i)
      if (include[i] && sample[i] > peak) peak = sample[i];

    if (norm.is_infinite() || peak == Scalar(0)) {
      pooled[c] = peak;
    } else if (norm.value() == 1.0) {
      Scalar sum = 0;
      for (Eigen::Index i = 0; i < size; ++i)
        if (include[i]) sum += sample[i];
      pooled[c] = sum / static_cast<Scalar>(count);
    } else {
      const double p = norm.value();
      double sum = 0;
      for (Eigen::Index i = 0; i < size; ++i)
        if (include[i]) sum += detail::minkowski_power(static_cast<double>(sample[i] / peak), p);
      pooled[c] = peak * static_cast<Scalar>(std::pow(sum / static_cast<double>(count), 1.0 / p));
    }
  }
  if ((pooled.array() == Scalar(0)).all()) return std::nullopt;
  return pooled;
}

template <typename Scalar>
std::optional<Rgb<Scalar>> try_estimate(const Image<Scalar>& image, const PixelMask& mask,
                                        const ParameterTuple& params) {
  params.Validate();
  if (!mask.Matches(image)) throw std::invalid_argument("mask dimensions differ from image");
  if (params.order == 0 && params.sigma == 0) return try_pool(image, mask, params.norm);
  return try_pool(filter_response(image, params.order, params.sigma), mask, params.norm);
}

/// Illuminant direction estimated by the (n, p, sigma) family member.
/// Throws ZeroSignalError when the pooled vector is all-zero.
template <typename Scalar>
Rgb<Scalar> estimate(const Image<Scalar>& image, const PixelMask& mask,
                     const ParameterTuple& params) {
  auto result = try_estimate(image, mask, params);
  if (!result) throw ZeroSignalError();
  return *result;
}

template <typename Scalar>
Rgb<Scalar> estimate_named(const Image<Scalar>& image, const PixelMask& mask,
                           const NamedMethod& method) {
  return estimate(image, mask, method.ToParameters());
}

/// Evaluates many tuples on one image, computing each distinct (order, sigma)
/// filter response once. Results are bitwise identical to try_estimate.
template <typename Scalar>
std::vector<std::optional<Rgb<Scalar>>> try_estimate_all(const Image<Scalar>& image,
                                                         const PixelMask& mask,
                                                         std::span<const ParameterTuple> tuples) {
  std::map<std::pair<int, double>, std::vector<std::size_t>> by_response;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    tuples[i].Validate();
    by_response[{tuples[i].order, tuples[i].sigma}].push_back(i);
  }
  std::vector<std::optional<Rgb<Scalar>>> results(tuples.size());
  for (const auto& [key, members] : by_response) {
    const auto [order, sigma] = key;
    if (order == 0 && sigma == 0) {
      for (std::size_t i : members) results[i] = try_pool(image, mask, tuples[i].norm);
    } else {
      const Image<Scalar> response = filter_response(image, order, sigma);
      for (std::size_t i : members) results[i] = try_pool(response, mask, tuples[i].norm);
    }
  }
  return results;
}

}  // namespace ccstat
