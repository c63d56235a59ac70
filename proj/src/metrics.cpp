#include "ccstat/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

#include "ccstat/error.hpp"

namespace ccstat {

namespace {

std::string fixed(double value, int precision) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", precision, value);
  return buffer;
}

std::string g12(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

double sample_std(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (n - 1));
}

}  // namespace

std::string ErrorSummary::CsvHeader() { return "count,mean,median,trimean,best25,worst25,avg"; }

std::string ErrorSummary::ToCsvRow() const {
  return std::to_string(count) + "," + g12(mean) + "," + g12(median) + "," + g12(trimean) + "," +
         g12(best25) + "," + g12(worst25) + "," + g12(avg);
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

ErrorSummary summarize(std::span<const double> errors) {
  if (errors.empty()) throw std::invalid_argument("cannot summarize an empty error list");
  std::vector<double> sorted(errors.begin(), errors.end());
  for (double e : sorted)
    if (!std::isfinite(e) || e < 0) throw std::invalid_argument("errors must be finite and >= 0");
  std::sort(sorted.begin(), sorted.end());

  const std::size_t n = sorted.size();
  const std::size_t quarter = (n + 3) / 4;

  ErrorSummary s;
  s.count = n;
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  s.median = sorted_quantile(sorted, 0.5);
  s.trimean = (sorted_quantile(sorted, 0.25) + 2 * s.median + sorted_quantile(sorted, 0.75)) / 4;
  s.best25 = std::accumulate(sorted.begin(), sorted.begin() + quarter, 0.0) / static_cast<double>(quarter);
  s.worst25 = std::accumulate(sorted.end() - quarter, sorted.end(), 0.0) / static_cast<double>(quarter);
  s.avg = std::pow(s.mean * s.median * s.trimean * s.best25 * s.worst25, 0.2);
  return s;
}

std::string format_summary_table(std::span<const std::pair<std::string, ErrorSummary>> rows) {
  std::size_t label_width = 9;
  for (const auto& [label, summary] : rows) label_width = std::max(label_width, label.size());

  std::ostringstream out;
  auto pad = [](std::string text, std::size_t width, bool left) {
    if (text.size() < width) text.insert(left ? text.end() : text.begin(), width - text.size(), ' ');
    return text;
  };
  out << pad("Algorithm", label_width, true);
  for (const char* h : {"Mean", "Med.", "Tri.", "Best 25%", "Worst 25%", "Avg."}) out << "  " << pad(h, 9, false);
  out << '\n';
  for (const auto& [label, s] : rows) {
    out << pad(label, label_width, true);
    for (double v : {s.mean, s.median, s.trimean, s.best25, s.worst25, s.avg}) out << "  " << pad(fixed(v, 2), 9, false);
    out << '\n';
  }
  return out.str();
}

double green_std(std::span<const Rgb<double>> estimates) {
  if (estimates.size() < 2) throw std::invalid_argument("green_std needs at least two estimates");
  std::vector<double> greens;
  greens.reserve(estimates.size());
  for (const auto& e : estimates) greens.push_back(to_chromaticity(e).g);
  return sample_std(greens);
}

Eigen::Vector3d chromaticity_std(std::span<const Rgb<double>> estimates) {
  if (estimates.size() < 2) throw std::invalid_argument("chromaticity_std needs at least two estimates");
  std::array<std::vector<double>, 3> components;
  for (const auto& e : estimates) {
    const Chromaticity c = to_chromaticity(e);
    components[0].push_back(c.r);
    components[1].push_back(c.g);
    components[2].push_back(c.b);
  }
  return {sample_std(components[0]), sample_std(components[1]), sample_std(components[2])};
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("pearson needs at least two points");
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0) || !(syy > 0)) throw DegenerateError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace ccstat
