#include <random>

#include "doctest.h"

#include "denise/morphology.hpp"

using namespace denise;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density = 0.3) {
  BinaryMask m(w, h);
  std::bernoulli_distribution d(density);
  for (auto& b : m.bits) b = d(rng) ? 1 : 0;
  return m;
}

// Minkowski-sum oracle: stamp the footprint at every foreground pixel.
BinaryMask dilate_stamp(const BinaryMask& m, const StructuringElement& se) {
  BinaryMask out(m.width, m.height);
  auto offs = se.offsets();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      for (auto [dx, dy] : offs) {
        int tx = x + dx, ty = y + dy;
        if (tx >= 0 && ty >= 0 && tx < m.width && ty < m.height) out.at(tx, ty) = 1;
      }
    }
  return out;
}

// Exhaustive scan: foreground pixels whose Euclidean distance to the nearest
// background-or-exterior pixel is <= d.
BinaryMask band_scan(const BinaryMask& m, int d) {
  BinaryMask out(m.width, m.height);
  const long d2 = static_cast<long>(d) * d;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      bool near_bg = false;
      // exterior pixels just beyond the border are background too
      for (int by = -d; by <= m.height + d && !near_bg; ++by)
        for (int bx = -d; bx <= m.width + d && !near_bg; ++bx) {
          bool bg = bx < 0 || by < 0 || bx >= m.width || by >= m.height || !m.at(bx, by);
          if (!bg) continue;
          long dx = bx - x, dy = by - y;
          if (dx * dx + dy * dy <= d2) near_bg = true;
        }
      if (near_bg) out.at(x, y) = 1;
    }
  return out;
}

bool subset(const BinaryMask& a, const BinaryMask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.bits[i] && !b.bits[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("single point dilation is the SE footprint") {
  BinaryMask m(33, 33);
  m.at(16, 16) = 1;
  BinaryMask d = dilate(m, StructuringElement::square(15));
  CHECK(d.count() == 31u * 31u);
  for (int y = 1; y <= 31; ++y)
    for (int x = 1; x <= 31; ++x) CHECK(d.at(x, y) == 1);
  CHECK(d.at(0, 0) == 0);
}

TEST_CASE("dilation of empty mask is empty") {
  BinaryMask m(16, 16);
  CHECK(dilate(m, StructuringElement::square(3)).count() == 0);
  CHECK(dilate(m, StructuringElement::disk(3)).count() == 0);
}

TEST_CASE("dilate matches stamping oracle on random masks") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 20; ++i) {
    BinaryMask m = random_mask(rng, 32, 32);
    for (int r = 1; r <= 4; ++r) {
      CHECK(dilate(m, StructuringElement::square(r)) ==
            dilate_stamp(m, StructuringElement::square(r)));
      CHECK(dilate(m, StructuringElement::disk(r)) ==
            dilate_stamp(m, StructuringElement::disk(r)));
    }
  }
}

TEST_CASE("erosion: solid mask keeps interior only") {
  BinaryMask m(32, 32, 1);
  BinaryMask e = erode(m, StructuringElement::square(1));
  CHECK(e.count() == 30u * 30u);
  CHECK(e.at(0, 0) == 0);
  CHECK(e.at(1, 1) == 1);
}

TEST_CASE("erosion of a single pixel is empty") {
  BinaryMask m(8, 8);
  m.at(4, 4) = 1;
  CHECK(erode(m, StructuringElement::square(1)).count() == 0);
}

TEST_CASE("erosion-dilation duality on the interior") {
  // erode(m) == complement of dilate(complement(m)) when the complement is
  // taken with a padded background border (matches exterior-as-background).
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10; ++i) {
    BinaryMask m = random_mask(rng, 24, 24);
    for (int r = 1; r <= 3; ++r) {
      auto se = StructuringElement::square(r);
      BinaryMask pad(m.width + 2 * r, m.height + 2 * r);
      for (int y = 0; y < pad.height; ++y)
        for (int x = 0; x < pad.width; ++x) {
          bool inside = x >= r && y >= r && x < m.width + r && y < m.height + r;
          pad.at(x, y) = (inside && m.at(x - r, y - r)) ? 0 : 1;  // complement + border
        }
      BinaryMask dil = dilate(pad, se);
      BinaryMask er = erode(m, se);
      for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) CHECK(er.at(x, y) == 1 - dil.at(x + r, y + r));
    }
  }
}

TEST_CASE("extensivity and anti-extensivity") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    BinaryMask m = random_mask(rng, 8 + i % 57, 8 + (i * 3) % 57);
    auto se = StructuringElement::square(1 + i % 3);
    CHECK(subset(m, dilate(m, se)));
    CHECK(subset(erode(m, se), m));
  }
}

TEST_CASE("monotonicity") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    BinaryMask a = random_mask(rng, 24, 24, 0.2);
    BinaryMask b = a;
    // grow b into a superset
    std::uniform_int_distribution<int> pos(0, 23);
    for (int k = 0; k < 20; ++k) b.at(pos(rng), pos(rng)) = 1;
    auto se = StructuringElement::disk(1 + i % 3);
    CHECK(subset(dilate(a, se), dilate(b, se)));
    CHECK(subset(erode(a, se), erode(b, se)));
  }
}

TEST_CASE("square dilation decomposes into repeated radius-1 passes") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 10; ++i) {
    BinaryMask m = random_mask(rng, 32, 32, 0.1);
    for (int r = 2; r <= 4; ++r) {
      BinaryMask once = dilate(m, StructuringElement::square(r));
      BinaryMask steps = m;
      for (int k = 0; k < r; ++k) steps = dilate(steps, StructuringElement::square(1));
      CHECK(once == steps);
    }
  }
}

TEST_CASE("boundary band of solid square is a 1-pixel frame") {
  BinaryMask m(10, 10, 1);
  BinaryMask band = boundary_band(m, 1);
  CHECK(band.count() == 36);
  CHECK(band.at(0, 0) == 1);
  CHECK(band.at(5, 5) == 0);
}

TEST_CASE("band with huge d equals the mask itself") {
  std::mt19937_64 rng(29);
  BinaryMask m = random_mask(rng, 20, 20);
  CHECK(boundary_band(m, 29) == m);  // 29 > diagonal of 20x20
}

TEST_CASE("boundary band matches exhaustive distance scan") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 8; ++i) {
    BinaryMask m = random_mask(rng, 64, 64, 0.4);
    CHECK(boundary_band(m, 3) == band_scan(m, 3));
  }
}

TEST_CASE("band nesting on repeated application") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 100; ++i) {
    BinaryMask m = random_mask(rng, 8 + i % 57, 8 + (i * 5) % 57);
    BinaryMask band = boundary_band(m, 2);
    CHECK(subset(boundary_band(band, 1), band));
  }
}
