#include "ccstat/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ccstat/error.hpp"

namespace ccstat {

namespace {

/// Interleaved decoded samples prior to channel expansion.
struct RawRaster {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 (gray) or 3 (rgb)
  double max_value = 0;
  std::vector<std::uint16_t> samples;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("cannot read '" + path.string() + "'");
  return bytes;
}

struct PngReadState {
  const std::vector<unsigned char>* bytes = nullptr;
  std::size_t offset = 0;
  char message[256] = {};
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->offset + length > state->bytes->size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, state->bytes->data() + state->offset, length);
  state->offset += length;
}

void png_on_error(png_structp png, png_const_charp message) {
  auto* state = static_cast<PngReadState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof state->message, "%s", message);
  png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

/// Returns false with state.message set on decode failure. No object with a
/// nontrivial destructor is created between setjmp and the end of decoding.
bool decode_png(const std::vector<unsigned char>& bytes, RawRaster& raster, PngReadState& state,
                std::vector<png_bytep>& rows, std::vector<unsigned char>& buffer) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_on_error, png_on_warning);
  if (!png) {
    std::snprintf(state.message, sizeof state.message, "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  state.bytes = &bytes;
  png_set_read_fn(png, &state, png_read_from_memory);
  png_read_info(png, info);

  const auto color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  raster.width = static_cast<int>(png_get_image_width(png, info));
  raster.height = static_cast<int>(png_get_image_height(png, info));
  raster.channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  raster.max_value = depth == 16 ? 65535.0 : 255.0;

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * static_cast<std::size_t>(raster.height));
  rows.resize(static_cast<std::size_t>(raster.height));
  for (int y = 0; y < raster.height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  const std::size_t count = static_cast<std::size_t>(raster.width) * raster.height * raster.channels;
  raster.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    raster.samples[i] = depth == 16
                            ? static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1])
                            : buffer[i];
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

RawRaster read_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  RawRaster raster;
  PngReadState state;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (!decode_png(bytes, raster, state, rows, buffer))
    throw DataError("cannot decode PNG '" + path.string() + "': " + state.message);
  return raster;
}

/// Binary PNM (P5 gray, P6 rgb); 16-bit samples are big-endian.
RawRaster read_pnm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  std::size_t pos = 2;
  auto fail = [&](const std::string& why) { return DataError("bad PNM '" + path.string() + "': " + why); };
  auto next_int = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("malformed header");
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos++] - '0');
      if (value > 1'000'000'000) throw fail("header value too large");
    }
    return value;
  };

  RawRaster raster;
  raster.channels = bytes[1] == '6' ? 3 : 1;
  raster.width = static_cast<int>(next_int());
  raster.height = static_cast<int>(next_int());
  const long maxval = next_int();
  if (maxval < 1 || maxval > 65535) throw fail("maxval out of range");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("missing header terminator");
  ++pos;
  raster.max_value = static_cast<double>(maxval);

  const std::size_t count = static_cast<std::size_t>(raster.width) * raster.height * raster.channels;
  const std::size_t width_bytes = maxval > 255 ? 2 : 1;
  if (bytes.size() - pos < count * width_bytes) throw fail("truncated pixel data");
  raster.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    raster.samples[i] = width_bytes == 2 ? static_cast<std::uint16_t>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1])
                                         : bytes[pos + i];
  }
  return raster;
}

RawRaster read_raster(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  static constexpr std::array<unsigned char, 8> kPngMagic = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  RawRaster raster;
  if (bytes.size() >= 8 && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    raster = read_png(bytes, path);
  } else if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) {
    raster = read_pnm(bytes, path);
  } else {
    throw DataError("unsupported raster format: '" + path.string() + "'");
  }
  if (raster.width < 1 || raster.height < 1) throw DataError("zero-sized image: '" + path.string() + "'");
  if (raster.channels != 1 && raster.channels != 3)
    throw DataError("unsupported channel layout in '" + path.string() + "'");
  return raster;
}

std::array<Plane<double>, 3> to_planes(const RawRaster& raster) {
  std::array<Plane<double>, 3> planes;
  for (auto& plane : planes) plane.resize(raster.height, raster.width);
  const std::size_t pixels = static_cast<std::size_t>(raster.width) * raster.height;
  for (std::size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < 3; ++c) {
      const int source = raster.channels == 3 ? c : 0;
      planes[c].data()[i] = raster.samples[i * raster.channels + source];
    }
  }
  return planes;
}

std::vector<std::uint16_t> quantize(const LinearImage& image, double max_value) {
  const std::size_t pixels = static_cast<std::size_t>(image.pixel_count());
  std::vector<std::uint16_t> samples(pixels * 3);
  for (std::size_t i = 0; i < pixels; ++i)
    for (int c = 0; c < 3; ++c)
      samples[i * 3 + c] = static_cast<std::uint16_t>(std::clamp(std::round(image.channel(c).data()[i]), 0.0, max_value));
  return samples;
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write '" + path.string() + "'");
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<unsigned char>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngWriteState {
  char message[256] = {};
};

void png_on_write_error(png_structp png, png_const_charp message) {
  auto* state = static_cast<PngWriteState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof state->message, "%s", message);
  png_longjmp(png, 1);
}

bool encode_png(const std::vector<std::uint16_t>& samples, int width, int height, int bit_depth,
                std::vector<unsigned char>& rows_buffer, std::vector<png_bytep>& rows,
                std::vector<unsigned char>& out, PngWriteState& state) {
  const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = static_cast<std::size_t>(width) * 3 * bytes_per_sample;
  rows_buffer.resize(row_bytes * height);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (bytes_per_sample == 2) {
      rows_buffer[2 * i] = static_cast<unsigned char>(samples[i] >> 8);
      rows_buffer[2 * i + 1] = static_cast<unsigned char>(samples[i] & 0xff);
    } else {
      rows_buffer[i] = static_cast<unsigned char>(samples[i]);
    }
  }
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = rows_buffer.data() + row_bytes * y;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, png_on_write_error, png_on_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

LinearImage load_image(const std::filesystem::path& path, const DecodeOptions& options) {
  const RawRaster raster = read_raster(path);
  const double white_level = options.white_level.value_or(raster.max_value);
  if (!(white_level > 0)) throw DataError("white level must be positive");
  return LinearImage(to_planes(raster), white_level);
}

PixelMask load_mask(const std::filesystem::path& path) {
  const RawRaster raster = read_raster(path);
  PixelMask::Flags flags(raster.height, raster.width);
  const std::size_t pixels = static_cast<std::size_t>(raster.width) * raster.height;
  for (std::size_t i = 0; i < pixels; ++i) {
    bool any = false;
    for (int c = 0; c < raster.channels; ++c) any = any || raster.samples[i * raster.channels + c] != 0;
    flags.data()[i] = any;
  }
  return PixelMask(std::move(flags));
}

void save_image(const std::filesystem::path& path, const LinearImage& image, RasterFormat format, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw std::invalid_argument("bit depth must be 8 or 16");
  const double max_value = bit_depth == 16 ? 65535.0 : 255.0;
  const auto samples = quantize(image, max_value);

  if (format == RasterFormat::kPpm) {
    const std::string header = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) +
                               "\n" + std::to_string(static_cast<int>(max_value)) + "\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    for (std::uint16_t s : samples) {
      if (bit_depth == 16) bytes.push_back(static_cast<unsigned char>(s >> 8));
      bytes.push_back(static_cast<unsigned char>(s & 0xff));
    }
    write_bytes(path, bytes);
    return;
  }

  std::vector<unsigned char> rows_buffer;
  std::vector<png_bytep> rows;
  std::vector<unsigned char> encoded;
  PngWriteState state;
  if (!encode_png(samples, image.width(), image.height(), bit_depth, rows_buffer, rows, encoded, state))
    throw DataError("cannot encode PNG '" + path.string() + "': " + state.message);
  write_bytes(path, encoded);
}

void save_mask(const std::filesystem::path& path, const PixelMask& mask) {
  std::array<Plane<double>, 3> planes;
  for (auto& plane : planes) plane = mask.flags().cast<double>() * 255.0;
  save_image(path, LinearImage(std::move(planes), 255.0), RasterFormat::kPng, 8);
}

}  // namespace ccstat
