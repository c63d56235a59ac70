#pragma once

#include <filesystem>
#include <optional>

#include "ccstat/image.hpp"

namespace ccstat {

struct DecodeOptions {
  /// Replaces the white level implied by the file's bit depth.
  std::optional<double> white_level;
};

enum class RasterFormat { kPng, kPpm };

/// Decodes an 8/16-bit PNG or binary PNM (P5/P6) into linear samples on the
/// file's own integer scale. Grayscale files are replicated into all three
/// channels and alpha is dropped.
LinearImage load_image(const std::filesystem::path& path, const DecodeOptions& options = {});

/// Reads a mask raster; a pixel is excluded iff all of its channels are zero.
PixelMask load_mask(const std::filesystem::path& path);

/// Writes samples rounded and clamped to [0, 2^bit_depth - 1].
void save_image(const std::filesystem::path& path, const LinearImage& image, RasterFormat format,
                int bit_depth = 16);

void save_mask(const std::filesystem::path& path, const PixelMask& mask);

}  // namespace ccstat
