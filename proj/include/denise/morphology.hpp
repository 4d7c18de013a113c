#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "denise/raster.hpp"

namespace denise {

// Square(r): Chebyshev ball, (2r+1)x(2r+1) footprint.
// Disk(r): Euclidean ball, offsets with dx^2+dy^2 <= r^2.
struct StructuringElement {
  enum class Shape { Square, Disk };
  Shape shape;
  int radius;

  static StructuringElement square(int r) {
    if (r < 1) throw std::invalid_argument("structuring element radius must be >= 1");
    return {Shape::Square, r};
  }
  static StructuringElement disk(int r) {
    if (r < 1) throw std::invalid_argument("structuring element radius must be >= 1");
    return {Shape::Disk, r};
  }

  std::vector<std::pair<int, int>> offsets() const {
    std::vector<std::pair<int, int>> out;
    const long r2 = static_cast<long>(radius) * radius;
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx) {
        if (shape == Shape::Disk && static_cast<long>(dx) * dx + static_cast<long>(dy) * dy > r2)
          continue;
        out.emplace_back(dx, dy);
      }
    return out;
  }
};

namespace detail {

// 1-D max filter along rows or columns, window [-r, r], exterior = 0.
inline BinaryMask run_max_1d(const BinaryMask& m, int r, bool horizontal) {
  BinaryMask out(m.width, m.height);
  if (horizontal) {
    for (int y = 0; y < m.height; ++y)
      for (int x = 0; x < m.width; ++x) {
        std::uint8_t v = 0;
        int lo = std::max(0, x - r), hi = std::min(m.width - 1, x + r);
        for (int i = lo; i <= hi && !v; ++i) v = m.at(i, y);
        out.at(x, y) = v;
      }
  } else {
    for (int x = 0; x < m.width; ++x)
      for (int y = 0; y < m.height; ++y) {
        std::uint8_t v = 0;
        int lo = std::max(0, y - r), hi = std::min(m.height - 1, y + r);
        for (int i = lo; i <= hi && !v; ++i) v = m.at(x, i);
        out.at(x, y) = v;
      }
  }
  return out;
}

inline BinaryMask dilate_offsets(const BinaryMask& m, const StructuringElement& se) {
  BinaryMask out(m.width, m.height);
  auto offs = se.offsets();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      std::uint8_t v = 0;
      for (auto [dx, dy] : offs) {
        int sx = x + dx, sy = y + dy;
        if (sx < 0 || sy < 0 || sx >= m.width || sy >= m.height) continue;
        if (m.at(sx, sy)) {
          v = 1;
          break;
        }
      }
      out.at(x, y) = v;
    }
  return out;
}

inline BinaryMask erode_offsets(const BinaryMask& m, const StructuringElement& se) {
  BinaryMask out(m.width, m.height);
  auto offs = se.offsets();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      std::uint8_t v = 1;
      for (auto [dx, dy] : offs) {
        int sx = x + dx, sy = y + dy;
        // exterior counts as background
        if (sx < 0 || sy < 0 || sx >= m.width || sy >= m.height || !m.at(sx, sy)) {
          v = 0;
          break;
        }
      }
      out.at(x, y) = v;
    }
  return out;
}

}  // namespace detail

// Output pixel is 1 iff any footprint pixel is 1; exterior = 0.
inline BinaryMask dilate(const BinaryMask& m, const StructuringElement& se) {
  if (se.shape == StructuringElement::Shape::Square) {
    // separable: two 1-D passes
    return detail::run_max_1d(detail::run_max_1d(m, se.radius, true), se.radius, false);
  }
  return detail::dilate_offsets(m, se);
}

// Output pixel is 1 iff every footprint pixel is 1; exterior = 0, so
// border-touching foreground erodes.
inline BinaryMask erode(const BinaryMask& m, const StructuringElement& se) {
  return detail::erode_offsets(m, se);
}

// mask AND NOT erode(mask, Disk(d)): foreground within Euclidean distance <= d
// of background (image exterior counts as background).
inline BinaryMask boundary_band(const BinaryMask& m, int d) {
  if (d < 1) throw std::invalid_argument("boundary band width must be >= 1");
  BinaryMask er = erode(m, StructuringElement::disk(d));
  BinaryMask out(m.width, m.height);
  for (std::size_t i = 0; i < m.size(); ++i) out.bits[i] = m.bits[i] && !er.bits[i];
  return out;
}

}  // namespace denise
