#include "ccstat/estimators.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ccstat {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

constexpr std::array<std::pair<MethodFamily, std::string_view>, 6> kMethodNames = {{
    {MethodFamily::kGrayWorld, "gray_world"},
    {MethodFamily::kWhitePatch, "white_patch"},
    {MethodFamily::kShadesOfGray, "shades_of_gray"},
    {MethodFamily::kGeneralGrayWorld, "general_gray_world"},
    {MethodFamily::kGrayEdge1, "gray_edge_1"},
    {MethodFamily::kGrayEdge2, "gray_edge_2"},
}};

}  // namespace

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buffer{};
  const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buffer.data(), end);
}

double parse_number(std::string_view text) {
  text = trim(text);
  if (text == "inf" || text == "Inf" || text == "infinity" || text == "+inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty())
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return value;
}

std::string ParameterTuple::ToString() const {
  return "n=" + std::to_string(order) + ",p=" + format_number(norm.value()) +
         ",sigma=" + format_number(sigma);
}

ParameterTuple ParameterTuple::Parse(std::string_view text) {
  ParameterTuple tuple;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    if (item.empty()) continue;

    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("expected key=value in parameters: '" + std::string(item) + "'");
    const std::string_view key = trim(item.substr(0, eq));
    const double value = parse_number(item.substr(eq + 1));
    if (key == "n") {
      if (value != std::floor(value)) throw std::invalid_argument("n must be an integer");
      tuple.order = static_cast<int>(value);
    } else if (key == "p") {
      tuple.norm = MinkowskiNorm(value);
    } else if (key == "sigma") {
      tuple.sigma = value;
    } else {
      throw std::invalid_argument("unknown parameter key '" + std::string(key) + "'");
    }
  }
  tuple.Validate();
  return tuple;
}

std::string_view method_name(MethodFamily family) {
  for (const auto& [f, name] : kMethodNames)
    if (f == family) return name;
  return "unknown";
}

MethodFamily parse_method(std::string_view name) {
  for (const auto& [f, known] : kMethodNames)
    if (known == name) return f;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

ParameterTuple NamedMethod::ToParameters() const {
  ParameterTuple t;
  switch (family) {
    case MethodFamily::kGrayWorld:
      t = {0, MinkowskiNorm(1.0), 0.0};
      break;
    case MethodFamily::kWhitePatch:
      t = {0, MinkowskiNorm::Infinity(), 0.0};
      break;
    case MethodFamily::kShadesOfGray:
      t = {0, MinkowskiNorm(p), 0.0};
      break;
    case MethodFamily::kGeneralGrayWorld:
      t = {0, MinkowskiNorm(p), sigma};
      break;
    case MethodFamily::kGrayEdge1:
      t = {1, MinkowskiNorm(p), sigma};
      break;
    case MethodFamily::kGrayEdge2:
      t = {2, MinkowskiNorm(p), sigma};
      break;
  }
  t.Validate();
  return t;
}

}  // namespace ccstat
