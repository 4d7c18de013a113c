#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "denise/io.hpp"
#include "denise/raster.hpp"

namespace denise {

// Synthetic "aerial buildings" scenes: rectangles (axis-aligned and rotated)
// and L-shapes on a textured background, with optional tree occlusions and
// shadows. Masks always record the clean footprints.
struct SceneConfig {
  int image_size = 64;
  int min_buildings = 1;
  int max_buildings = 4;
  // Brightness ranges overlap on purpose: buildings are hard to tell from
  // terrain by intensity alone, so boundary evidence carries real weight.
  int building_min_dim = 5;
  int building_max_dim = 9;
  float building_brightness_lo = 0.30f;
  float building_brightness_hi = 0.60f;
  float background_brightness_lo = 0.25f;
  float background_brightness_hi = 0.55f;
  float noise_std = 0.03f;
  float occlusion_prob = 0.3f;
  float occlusion_max_fraction = 0.3f;
  float shadow_prob = 0.5f;
  std::uint64_t seed = 0;

  void validate() const {
    if (image_size < 32) throw std::invalid_argument("scene: image_size must be >= 32");
    if (min_buildings < 1 || max_buildings < min_buildings)
      throw std::invalid_argument("scene: invalid building count range");
    if (building_min_dim < 4)
      throw std::invalid_argument("scene: building_min_dim must be >= 4");
    auto unit = [](float v) { return v >= 0.0f && v <= 1.0f; };
    if (!unit(occlusion_prob) || !unit(shadow_prob) || !unit(occlusion_max_fraction))
      throw std::invalid_argument("scene: probabilities must be in [0,1]");
    if (!unit(building_brightness_lo) || !unit(building_brightness_hi) ||
        !unit(background_brightness_lo) || !unit(background_brightness_hi))
      throw std::invalid_argument("scene: brightness ranges must be in [0,1]");
  }

  std::string echo() const {
    std::ostringstream os;
    os << "size=" << image_size << " buildings=" << min_buildings << ".." << max_buildings
       << " dims=" << building_min_dim << ".." << building_max_dim
       << " noise=" << noise_std << " occlusion=" << occlusion_prob << "/"
       << occlusion_max_fraction << " shadow=" << shadow_prob << " seed=" << seed;
    return os.str();
  }
};

enum class Split { Train, Val, Test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    default: return "test";
  }
}

inline Split split_from_name(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split name: '" + s + "'");
}

struct ManifestEntry {
  std::string id;
  std::string image_path;  // relative to root
  std::string mask_path;   // relative to root
  Split split = Split::Train;
};

struct DatasetManifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
  std::string config_echo;
  std::uint64_t seed = 0;

  std::vector<ManifestEntry> split(Split s) const {
    std::vector<ManifestEntry> out;
    for (const auto& e : entries)
      if (e.split == s) out.push_back(e);
    return out;
  }
};

struct Scene {
  Raster image;        // occluded/shadowed render, 3-channel U8
  Raster clean_image;  // same scene without occlusions/shadows
  BinaryMask mask;     // union of clean footprints
  std::vector<BinaryMask> footprints;  // per building
};

namespace detail {

inline void paint(Raster& img, int x, int y, float r, float g, float b) {
  img.at(x, y, 0) = static_cast<float>(round_u8(r));
  img.at(x, y, 1) = static_cast<float>(round_u8(g));
  img.at(x, y, 2) = static_cast<float>(round_u8(b));
}

// Footprint of one building; all shapes are clipped to the image and kept at
// least 4x4 in bounding extent by construction of the sampled parameters.
inline BinaryMask draw_footprint(int size, int min_dim, int max_dim, std::mt19937_64& rng) {
  BinaryMask fp(size, size);
  std::uniform_int_distribution<int> shape_pick(0, 2);
  std::uniform_int_distribution<int> dim(min_dim, std::max(min_dim + 1, max_dim));
  std::uniform_int_distribution<int> pos(2, size - 3);
  int shape = shape_pick(rng);
  int w = dim(rng), h = dim(rng);
  int cx = pos(rng), cy = pos(rng);

  if (shape == 0) {  // axis-aligned rectangle
    for (int y = cy - h / 2; y < cy - h / 2 + h; ++y)
      for (int x = cx - w / 2; x < cx - w / 2 + w; ++x)
        if (x >= 0 && y >= 0 && x < size && y < size) fp.at(x, y) = 1;
  } else if (shape == 1) {  // rotated rectangle
    std::uniform_real_distribution<double> ang(0.0, 3.14159265358979323846);
    double a = ang(rng), ca = std::cos(a), sa = std::sin(a);
    double hw = w / 2.0, hh = h / 2.0;
    int r = static_cast<int>(std::ceil(std::sqrt(hw * hw + hh * hh)));
    for (int y = cy - r; y <= cy + r; ++y)
      for (int x = cx - r; x <= cx + r; ++x) {
        if (x < 0 || y < 0 || x >= size || y >= size) continue;
        double dx = x - cx, dy = y - cy;
        double u = dx * ca + dy * sa, v = -dx * sa + dy * ca;
        if (std::abs(u) <= hw && std::abs(v) <= hh) fp.at(x, y) = 1;
      }
  } else {  // L-shape: big rectangle minus one quadrant
    int qw = w / 2, qh = h / 2;
    for (int y = cy - h / 2; y < cy - h / 2 + h; ++y)
      for (int x = cx - w / 2; x < cx - w / 2 + w; ++x) {
        if (x < 0 || y < 0 || x >= size || y >= size) continue;
        if (x >= cx && y >= cy && (x - cx) < qw && (y - cy) < qh) continue;
        fp.at(x, y) = 1;
      }
  }
  return fp;
}

}  // namespace detail

// Deterministic per-index scene render. The per-sample RNG stream depends only
// on (cfg.seed, index), so generation order and thread count do not matter.
inline Scene render_scene(const SceneConfig& cfg, std::uint64_t index) {
  cfg.validate();
  std::seed_seq sseq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                     static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(sseq);
  const int n = cfg.image_size;

  Scene sc;
  sc.image = Raster(n, n, 3, Domain::U8);
  sc.mask = BinaryMask(n, n);

  std::uniform_real_distribution<float> bg(cfg.background_brightness_lo,
                                           cfg.background_brightness_hi);
  std::uniform_real_distribution<float> bb(cfg.building_brightness_lo,
                                           cfg.building_brightness_hi);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  std::normal_distribution<float> noise(0.0f, cfg.noise_std);

  float bg_base = bg(rng);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      float v = std::clamp(bg_base + noise(rng), 0.0f, 1.0f);
      // slight greenish cast on background terrain
      detail::paint(sc.image, x, y, v * 0.9f, v, v * 0.8f);
    }

  std::uniform_int_distribution<int> count(cfg.min_buildings, cfg.max_buildings);
  int buildings = count(rng);
  auto overlaps = [&](const BinaryMask& fp) {
    for (std::size_t i = 0; i < fp.size(); ++i)
      if (fp.bits[i] && sc.mask.bits[i]) return true;
    return false;
  };
  const int max_dim = cfg.building_max_dim > 0 ? cfg.building_max_dim : n / 3;
  for (int bi = 0; bi < buildings; ++bi) {
    // redraw on border clipping or overlap with an existing building
    BinaryMask fp = detail::draw_footprint(n, cfg.building_min_dim, max_dim, rng);
    int attempts = 0;
    while ((fp.count() < 16 || overlaps(fp)) && attempts++ < 8)
      fp = detail::draw_footprint(n, cfg.building_min_dim, max_dim, rng);
    if (fp.count() < 16 || overlaps(fp)) continue;
    float bright = bb(rng);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (fp.at(x, y)) {
          float v = std::clamp(bright + noise(rng), 0.0f, 1.0f);
          detail::paint(sc.image, x, y, v, v * 0.97f, v * 0.94f);
          sc.mask.at(x, y) = 1;
        }
    sc.footprints.push_back(std::move(fp));
  }

  sc.clean_image = sc.image;

  // Shadows darken background pixels adjacent to a building (the footprint
  // shifted by a fixed sun offset); masks are never touched.
  std::uniform_int_distribution<int> shift(2, 5);
  for (const auto& fp : sc.footprints) {
    if (uni(rng) >= cfg.shadow_prob) continue;
    int dx = shift(rng), dy = shift(rng);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        int sx = x - dx, sy = y - dy;
        if (sx < 0 || sy < 0 || sx >= n || sy >= n) continue;
        if (fp.at(sx, sy) && !sc.mask.at(x, y))
          detail::paint(sc.image, x, y, sc.image.at(x, y, 0) / 255.0f * 0.45f,
                        sc.image.at(x, y, 1) / 255.0f * 0.45f,
                        sc.image.at(x, y, 2) / 255.0f * 0.45f);
      }
  }

  // Tree occlusions hide image pixels but never edit the mask. At most
  // occlusion_max_fraction of each building's footprint is overpainted.
  for (const auto& fp : sc.footprints) {
    if (uni(rng) >= cfg.occlusion_prob) continue;
    std::vector<std::pair<int, int>> cells;
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (fp.at(x, y)) cells.emplace_back(x, y);
    std::size_t limit =
        static_cast<std::size_t>(std::floor(cfg.occlusion_max_fraction * cells.size()));
    if (limit == 0) continue;
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    auto [ox, oy] = cells[pick(rng)];
    std::uniform_int_distribution<int> rad(2, 5);
    int r = rad(rng);
    std::size_t painted = 0;
    for (int y = oy - r; y <= oy + r && painted < limit; ++y)
      for (int x = ox - r; x <= ox + r && painted < limit; ++x) {
        if (x < 0 || y < 0 || x >= n || y >= n) continue;
        int dx = x - ox, dy = y - oy;
        if (dx * dx + dy * dy > r * r) continue;
        if (!fp.at(x, y)) continue;
        float v = std::clamp(0.18f + noise(rng), 0.0f, 1.0f);
        detail::paint(sc.image, x, y, v * 0.5f, v, v * 0.4f);
        ++painted;
      }
    // canopy spills over the footprint edge
    for (int y = oy - r; y <= oy + r; ++y)
      for (int x = ox - r; x <= ox + r; ++x) {
        if (x < 0 || y < 0 || x >= n || y >= n) continue;
        int dx = x - ox, dy = y - oy;
        if (dx * dx + dy * dy > r * r) continue;
        if (fp.at(x, y) || sc.mask.at(x, y)) continue;
        float v = std::clamp(0.18f + noise(rng), 0.0f, 1.0f);
        detail::paint(sc.image, x, y, v * 0.5f, v, v * 0.4f);
      }
  }

  return sc;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path);

// Writes n image/mask pairs under out/images and out/masks plus a manifest at
// out/manifest.txt. All entries start in the train split.
inline DatasetManifest generate_dataset(const SceneConfig& cfg, int n, const std::string& out) {
  cfg.validate();
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out) / "images");
  fs::create_directories(fs::path(out) / "masks");

  DatasetManifest man;
  man.root = fs::path(out);
  man.seed = cfg.seed;
  man.config_echo = cfg.echo();
  for (int i = 0; i < n; ++i) {
    Scene sc = render_scene(cfg, static_cast<std::uint64_t>(i));
    std::ostringstream id;
    id << "s" << std::setw(5) << std::setfill('0') << i;
    ManifestEntry e;
    e.id = id.str();
    e.image_path = "images/" + e.id + ".png";
    e.mask_path = "masks/" + e.id + ".png";
    write_raster(sc.image, (man.root / e.image_path).string());
    write_mask(sc.mask, (man.root / e.mask_path).string());
    man.entries.push_back(std::move(e));
  }
  save_manifest(man, (man.root / "manifest.txt").string());
  return man;
}

// Seeded shuffle then contiguous assignment; floor-based counts with
// remainders going to train.
inline DatasetManifest split_dataset(const DatasetManifest& man, double train_ratio,
                                     double val_ratio, double test_ratio, std::uint64_t seed) {
  if (train_ratio <= 0 || val_ratio <= 0 || test_ratio <= 0 ||
      std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9)
    throw std::invalid_argument("split_dataset: ratios must be positive and sum to 1");
  const std::size_t n = man.entries.size();
  if (n < 3) throw std::invalid_argument("split_dataset: need at least 3 entries");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::size_t n_val = static_cast<std::size_t>(std::floor(val_ratio * n));
  std::size_t n_test = static_cast<std::size_t>(std::floor(test_ratio * n));
  std::size_t n_train = n - n_val - n_test;

  DatasetManifest out = man;
  for (std::size_t k = 0; k < n; ++k) {
    Split s = k < n_train ? Split::Train : k < n_train + n_val ? Split::Val : Split::Test;
    out.entries[order[k]].split = s;
  }
  return out;
}

inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "# denise dataset manifest\n";
  out << "# seed " << m.seed << "\n";
  out << "# config " << m.config_echo << "\n";
  for (const auto& e : m.entries)
    out << e.id << " " << e.image_path << " " << e.mask_path << " " << split_name(e.split)
        << "\n";
}

inline DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path + "'");
  DatasetManifest m;
  m.root = std::filesystem::path(path).parent_path();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line);
      std::string hash, key;
      ls >> hash >> key;
      if (key == "seed") ls >> m.seed;
      if (key == "config") {
        std::string rest;
        std::getline(ls, rest);
        m.config_echo = rest.empty() ? "" : rest.substr(1);
      }
      continue;
    }
    std::istringstream ls(line);
    ManifestEntry e;
    std::string split;
    if (!(ls >> e.id >> e.image_path >> e.mask_path >> split))
      throw IoError("'" + path + "': malformed manifest line: " + line);
    e.split = split_from_name(split);
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw IoError("'" + path + "': no entries");

  std::vector<std::string> dangling;
  for (const auto& e : m.entries) {
    if (!std::filesystem::exists(m.root / e.image_path) ||
        !std::filesystem::exists(m.root / e.mask_path))
      dangling.push_back(e.id);
  }
  if (!dangling.empty()) {
    std::string msg = "'" + path + "': missing files for ids:";
    for (const auto& id : dangling) msg += " " + id;
    throw IoError(msg);
  }
  return m;
}

}  // namespace denise
