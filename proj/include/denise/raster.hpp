#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace denise {

// Value domain of a raster buffer. U8 samples are integers 0..255 stored in
// floats; UnitF samples are finite float32 values in [0,1].
enum class Domain { U8, UnitF };

inline std::uint8_t round_u8(double v) {
  double r = std::floor(v * 255.0 + 0.5);
  if (r < 0.0) return 0;
  if (r > 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

// Planar (channel-major) raster: channel c occupies the contiguous block
// data[c*w*h .. (c+1)*w*h).
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  Domain domain = Domain::U8;
  std::vector<float> data;

  Raster() = default;
  Raster(int w, int h, int c, Domain d)
      : width(w), height(h), channels(c), domain(d),
        data(static_cast<std::size_t>(w) * h * c, 0.0f) {
    if (w < 1 || h < 1) throw std::invalid_argument("raster: size must be >= 1x1");
    if (c != 1 && c != 3 && c != 4) throw std::invalid_argument("raster: channels must be 1, 3 or 4");
  }

  std::size_t plane() const { return static_cast<std::size_t>(width) * height; }
  std::size_t size() const { return plane() * channels; }

  float at(int x, int y, int c) const {
    return data[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * width + x];
  }
  float& at(int x, int y, int c) {
    return data[static_cast<std::size_t>(c) * plane() + static_cast<std::size_t>(y) * width + x];
  }

  bool same_shape(const Raster& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

// Single-channel unit-interval float map (first-stage prediction output).
struct ProbMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  ProbMap() = default;
  ProbMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
};

// Single-channel {0,1} raster.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return bits.size(); }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }

  bool operator==(const BinaryMask& o) const {
    return width == o.width && height == o.height && bits == o.bits;
  }
};

// U8 -> UnitF, each sample v/255. Identity on UnitF input.
inline Raster to_unit(const Raster& r) {
  if (r.domain == Domain::UnitF) return r;
  Raster out = r;
  out.domain = Domain::UnitF;
  for (auto& v : out.data) v = static_cast<float>(static_cast<double>(v) / 255.0);
  return out;
}

// UnitF -> U8 by floor(v*255 + 0.5), clamped. Identity on U8 input.
inline Raster to_u8(const Raster& r) {
  if (r.domain == Domain::U8) return r;
  Raster out = r;
  out.domain = Domain::U8;
  for (auto& v : out.data) v = static_cast<float>(round_u8(static_cast<double>(v)));
  return out;
}

inline ProbMap channel_as_probmap(const Raster& r, int c = 0) {
  ProbMap p(r.width, r.height);
  const Raster u = to_unit(r);
  for (std::size_t i = 0; i < p.size(); ++i) p.values[i] = u.data[c * u.plane() + i];
  return p;
}

inline BinaryMask mask_from_raster(const Raster& r) {
  BinaryMask m(r.width, r.height);
  for (std::size_t i = 0; i < m.size(); ++i) {
    float v = r.data[i];
    if (r.domain == Domain::U8)
      m.bits[i] = v >= 128.0f ? 1 : 0;
    else
      m.bits[i] = v >= 0.5f ? 1 : 0;
  }
  return m;
}

}  // namespace denise
