#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <type_traits>

#include "ccstat/image.hpp"

namespace ccstat {

/// Odd-length correlation kernel with taps at offsets -radius..radius.
/// Gaussian kernels are symmetric; first-derivative kernels antisymmetric;
/// second-derivative kernels symmetric with an implied center tap that makes
/// them sum to exactly zero. Correlation exploits the symmetry so that
/// derivative responses of flat regions are exactly zero.
struct Kernel1D {
  enum class Symmetry { kEven, kOdd, kEvenZeroSum };

  Eigen::ArrayXd taps;
  Symmetry symmetry = Symmetry::kEven;

  int radius() const { return static_cast<int>(taps.size() / 2); }
  double at(int offset) const { return taps[offset + radius()]; }
};

/// Index into an infinite half-sample symmetric extension of [0, n):
/// ... c b a | a b c ... | c b a ...
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  const Eigen::Index period = 2 * n;
  Eigen::Index m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

inline int gaussian_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

/// Sampled Gaussian (order 0) or Gaussian-derivative (order 1, 2) kernel,
/// laid out for correlation. Normalization makes the kernels exact on
/// polynomials: order 0 sums to one, order 1 maps x to 1, order 2 sums to zero
/// and maps x^2/2 to 1. sigma == 0 yields the identity and central differences.
inline Kernel1D gaussian_kernel(double sigma, int order) {
  if (!(sigma >= 0)) throw std::invalid_argument("sigma must be >= 0");
  if (order < 0 || order > 2) throw std::invalid_argument("kernel order must be 0, 1 or 2");

  if (sigma == 0) {
    switch (order) {
      case 0: return {Eigen::ArrayXd::Constant(1, 1.0), Kernel1D::Symmetry::kEven};
      case 1: return {(Eigen::ArrayXd(3) << -0.5, 0.0, 0.5).finished(), Kernel1D::Symmetry::kOdd};
      default:
        return {(Eigen::ArrayXd(3) << 1.0, -2.0, 1.0).finished(),
                Kernel1D::Symmetry::kEvenZeroSum};
    }
  }

  const int radius = gaussian_radius(sigma);
  const Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(2 * radius + 1, -radius, radius);
  const double var = sigma * sigma;
  Eigen::ArrayXd g = (-x.square() / (2 * var)).exp();
  g /= g.sum();

  switch (order) {
    case 0:
      return {g, Kernel1D::Symmetry::kEven};
    case 1: {
      Eigen::ArrayXd d = x * g;
      d /= (x * d).sum();
      d[radius] = 0.0;
      return {d, Kernel1D::Symmetry::kOdd};
    }
    default: {
      Eigen::ArrayXd d = (x.square() / (var * var) - 1.0 / var) * g;
      d -= d.mean();
      d /= (0.5 * x.square() * d).sum();
      d[radius] = 0.0;
      d[radius] = -d.sum();
      return {d, Kernel1D::Symmetry::kEvenZeroSum};
    }
  }
}

namespace detail {

/// out = sum_k taps[k] * sample(center + k), evaluated pairwise about the
/// center according to the kernel's symmetry. `sample(k)` returns the
/// (vectorized) input shifted by k.
template <typename Out, typename Sample>
void accumulate_symmetric(Out&& out, const Kernel1D& kernel, Sample&& sample) {
  using Scalar = typename std::decay_t<Out>::Scalar;
  const int r = kernel.radius();
  const auto center = sample(0);
  switch (kernel.symmetry) {
    case Kernel1D::Symmetry::kEven:
      out = static_cast<Scalar>(kernel.at(0)) * center;
      for (int k = 1; k <= r; ++k) out += static_cast<Scalar>(kernel.at(k)) * (sample(k) + sample(-k));
      break;
    case Kernel1D::Symmetry::kOdd:
      out.setZero();
      for (int k = 1; k <= r; ++k) out += static_cast<Scalar>(kernel.at(k)) * (sample(k) - sample(-k));
      break;
    case Kernel1D::Symmetry::kEvenZeroSum:
      out.setZero();
      for (int k = 1; k <= r; ++k)
        out += static_cast<Scalar>(kernel.at(k)) * ((sample(k) - center) + (sample(-k) - center));
      break;
  }
}

}  // namespace detail

/// Correlates every row of `in` with `kernel` (reflect-padded).
template <typename Scalar>
Plane<Scalar> correlate_rows(const Plane<Scalar>& in, const Kernel1D& kernel) {
  const int r = kernel.radius();
  const Eigen::Index w = in.cols();
  Plane<Scalar> out(in.rows(), w);
  Eigen::Array<Scalar, 1, Eigen::Dynamic> padded(w + 2 * r);
  for (Eigen::Index y = 0; y < in.rows(); ++y) {
    for (Eigen::Index i = 0; i < padded.size(); ++i) padded[i] = in(y, reflect_index(i - r, w));
    detail::accumulate_symmetric(out.row(y), kernel,
                                 [&](int k) { return padded.segment(r + k, w); });
  }
  return out;
}

/// Correlates every column of `in` with `kernel` (reflect-padded).
template <typename Scalar>
Plane<Scalar> correlate_cols(const Plane<Scalar>& in, const Kernel1D& kernel) {
  const Eigen::Index h = in.rows();
  Plane<Scalar> out(h, in.cols());
  for (Eigen::Index y = 0; y < h; ++y) {
    detail::accumulate_symmetric(out.row(y), kernel,
                                 [&](int k) { return in.row(reflect_index(y + k, h)); });
  }
  return out;
}

template <typename Scalar>
Plane<Scalar> correlate_separable(const Plane<Scalar>& in, const Kernel1D& along_x,
                                  const Kernel1D& along_y) {
  return correlate_cols(correlate_rows(in, along_x), along_y);
}

template <typename Scalar>
Image<Scalar> gaussian_smooth(const Image<Scalar>& image, double sigma) {
  if (!(sigma >= 0)) throw std::invalid_argument("sigma must be >= 0");
  if (sigma == 0) return image;
  const Kernel1D g = gaussian_kernel(sigma, 0);
  std::array<Plane<Scalar>, 3> planes;
  for (int c = 0; c < 3; ++c) planes[c] = correlate_separable(image.channel(c), g, g);
  return Image<Scalar>(std::move(planes), image.white_level());
}

/// Per-channel magnitude of the smoothed image's first or second derivatives:
/// sqrt(fx^2 + fy^2) for order 1, sqrt(fxx^2 + 4 fxy^2 + fyy^2) for order 2.
template <typename Scalar>
Image<Scalar> derivative_magnitude(const Image<Scalar>& image, int order, double sigma) {
  if (order != 1 && order != 2) throw std::invalid_argument("derivative order must be 1 or 2");
  const Kernel1D g0 = gaussian_kernel(sigma, 0);
  const Kernel1D g1 = gaussian_kernel(sigma, 1);

  std::array<Plane<Scalar>, 3> planes;
  for (int c = 0; c < 3; ++c) {
    const auto& f = image.channel(c);
    const Plane<Scalar> smooth_x = correlate_rows(f, g0);
    const Plane<Scalar> diff_x = correlate_rows(f, g1);
    if (order == 1) {
      const Plane<Scalar> fx = correlate_cols(diff_x, g0);
      const Plane<Scalar> fy = correlate_cols(smooth_x, g1);
      planes[c] = (fx.square() + fy.square()).sqrt();
    } else {
      const Kernel1D g2 = gaussian_kernel(sigma, 2);
      const Plane<Scalar> fxx = correlate_cols(correlate_rows(f, g2), g0);
      const Plane<Scalar> fyy = correlate_cols(smooth_x, g2);
      const Plane<Scalar> fxy = correlate_cols(diff_x, g1);
      planes[c] = (fxx.square() + Scalar(4) * fxy.square() + fyy.square()).sqrt();
    }
  }
  return Image<Scalar>(std::move(planes), image.white_level());
}

/// The raster an estimator pools: the smoothed image for order 0, otherwise
/// the derivative magnitude.
template <typename Scalar>
Image<Scalar> filter_response(const Image<Scalar>& image, int order, double sigma) {
  return order == 0 ? gaussian_smooth(image, sigma) : derivative_magnitude(image, order, sigma);
}

}  // namespace ccstat
