#pragma once

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <png.h>

#include "denise/raster.hpp"

namespace denise {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline Raster read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open '" + path + "'");

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError("'" + path + "': not a PNG file (bad signature)");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("'" + path + "': corrupt PNG data");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);
  int w = static_cast<int>(png_get_image_width(png, info));
  int h = static_cast<int>(png_get_image_height(png, info));
  if (depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("'" + path + "': unsupported bit depth 16 (8-bit only)");
  }
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  int ch = png_get_channels(png, info);
  if (ch == 2) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("'" + path + "': unsupported channel count 2");
  }

  std::vector<png_byte> row(static_cast<std::size_t>(w) * ch);
  Raster out(w, h, ch, Domain::U8);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) out.at(x, y, c) = static_cast<float>(row[x * ch + c]);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

inline void write_png(const Raster& r, const std::string& path) {
  if (r.domain != Domain::U8) throw IoError("'" + path + "': PNG output limited to U8 rasters");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write '" + path + "'");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("'" + path + "': PNG write failure");
  }
  png_init_io(png, fp.get());
  int color = r.channels == 1   ? PNG_COLOR_TYPE_GRAY
              : r.channels == 3 ? PNG_COLOR_TYPE_RGB
                                : PNG_COLOR_TYPE_RGBA;
  png_set_IHDR(png, info, r.width, r.height, 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(r.width) * r.channels);
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < r.channels; ++c)
        row[x * r.channels + c] = static_cast<png_byte>(r.at(x, y, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// DPF ("DeNISE planar float"), little-endian:
//   magic "DPF1", u32 width, u32 height, u32 channels,
//   then w*h*c IEEE-754 float32 values, channel-major.
inline Raster read_dpf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  std::uint32_t w = 0, h = 0, c = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  in.read(reinterpret_cast<char*>(&c), 4);
  if (!in || std::memcmp(magic, "DPF1", 4) != 0)
    throw IoError("'" + path + "': corrupt DPF header");
  if (w < 1 || h < 1 || (c != 1 && c != 3 && c != 4))
    throw IoError("'" + path + "': invalid DPF dimensions");
  Raster out(static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), Domain::UnitF);
  in.read(reinterpret_cast<char*>(out.data.data()),
          static_cast<std::streamsize>(out.size() * sizeof(float)));
  if (!in) throw IoError("'" + path + "': truncated DPF payload");
  return out;
}

inline void write_dpf(const Raster& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  std::uint32_t w = static_cast<std::uint32_t>(r.width);
  std::uint32_t h = static_cast<std::uint32_t>(r.height);
  std::uint32_t c = static_cast<std::uint32_t>(r.channels);
  out.write("DPF1", 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(&c), 4);
  out.write(reinterpret_cast<const char*>(r.data.data()),
            static_cast<std::streamsize>(r.size() * sizeof(float)));
  if (!out) throw IoError("'" + path + "': DPF write failure");
}

}  // namespace detail

inline bool has_extension(const std::string& path, const char* ext) {
  auto e = std::filesystem::path(path).extension().string();
  for (auto& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e == ext;
}

// Dispatches on extension: .png -> 8-bit PNG (U8), .dpf -> planar float (UnitF).
inline Raster read_raster(const std::string& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: '" + path + "'");
  if (has_extension(path, ".dpf")) return detail::read_dpf(path);
  return detail::read_png(path);
}

inline void write_raster(const Raster& r, const std::string& path) {
  if (has_extension(path, ".dpf")) {
    if (r.domain != Domain::UnitF)
      throw IoError("'" + path + "': DPF output requires UnitF domain");
    detail::write_dpf(r, path);
    return;
  }
  detail::write_png(r, path);
}

inline ProbMap read_probmap(const std::string& path) {
  Raster r = read_raster(path);
  if (r.channels != 1) throw IoError("'" + path + "': probability map must be 1-channel");
  ProbMap p = channel_as_probmap(r);
  for (float v : p.values)
    if (!(v >= 0.0f && v <= 1.0f))
      throw IoError("'" + path + "': probability value outside [0,1]");
  return p;
}

inline BinaryMask read_mask(const std::string& path) {
  Raster r = read_raster(path);
  if (r.channels != 1) throw IoError("'" + path + "': mask must be 1-channel");
  return mask_from_raster(r);
}

inline void write_mask(const BinaryMask& m, const std::string& path) {
  Raster r(m.width, m.height, 1, Domain::U8);
  for (std::size_t i = 0; i < m.size(); ++i) r.data[i] = m.bits[i] ? 255.0f : 0.0f;
  write_raster(r, path);
}

inline void write_probmap(const ProbMap& p, const std::string& path) {
  Raster r(p.width, p.height, 1, Domain::UnitF);
  r.data = p.values;
  write_raster(r, path);
}

}  // namespace denise
