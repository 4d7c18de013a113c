#include <filesystem>
#include <random>

#include "doctest.h"

#include "denise/metrics.hpp"

using namespace denise;
namespace fs = std::filesystem;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int w, int h, double density = 0.3) {
  BinaryMask m(w, h);
  std::bernoulli_distribution d(density);
  for (auto& b : m.bits) b = d(rng) ? 1 : 0;
  return m;
}

// Exhaustive band + count oracle for boundary IoU.
BinaryMask band_scan(const BinaryMask& m, int d) {
  BinaryMask out(m.width, m.height);
  const long d2 = static_cast<long>(d) * d;
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) {
      if (!m.at(x, y)) continue;
      bool near_bg = false;
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

double biou_scan(const BinaryMask& a, const BinaryMask& b, int d) {
  return iou(band_scan(a, d), band_scan(b, d));
}

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / "denise_test_metrics" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("iou basics") {
  std::mt19937_64 rng(1);
  BinaryMask a = random_mask(rng, 16, 16);
  CHECK(iou(a, a) == 1.0);

  BinaryMask left(4, 4), right(4, 4);
  left.at(0, 0) = 1;
  right.at(3, 3) = 1;
  CHECK(iou(left, right) == 0.0);

  BinaryMask empty(4, 4);
  CHECK(iou(empty, empty) == 1.0);
}

TEST_CASE("iou of shifted 2x2 blocks is 1/3") {
  BinaryMask a(4, 4), b(4, 4);
  for (int y = 1; y <= 2; ++y)
    for (int x = 0; x <= 1; ++x) a.at(x, y) = 1;
  for (int y = 1; y <= 2; ++y)
    for (int x = 1; x <= 2; ++x) b.at(x, y) = 1;
  CHECK(iou(a, b) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou is symmetric and bounded") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    BinaryMask a = random_mask(rng, 20, 20), b = random_mask(rng, 20, 20);
    double v = iou(a, b);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("iou rejects mismatched dimensions") {
  CHECK_THROWS_AS(iou(BinaryMask(4, 4), BinaryMask(4, 5)), std::invalid_argument);
}

TEST_CASE("boundary_iou of identical masks is 1") {
  std::mt19937_64 rng(3);
  BinaryMask a = random_mask(rng, 32, 32);
  CHECK(boundary_iou(a, a) == 1.0);
}

TEST_CASE("band saturation: huge d reduces boundary_iou to iou") {
  std::mt19937_64 rng(4);
  MetricsConfig cfg;
  cfg.band_mode = MetricsConfig::BandMode::Pixels;
  for (int i = 0; i < 20; ++i) {
    int w = 16 + i, h = 24;
    BinaryMask a = random_mask(rng, w, h), b = random_mask(rng, w, h);
    cfg.band_pixels = static_cast<int>(std::ceil(std::sqrt(double(w) * w + double(h) * h)));
    CHECK(boundary_iou(a, b, cfg) == iou(a, b));
  }
}

TEST_CASE("boundary_iou matches exhaustive distance-scan oracle") {
  std::mt19937_64 rng(5);
  MetricsConfig cfg;
  cfg.band_mode = MetricsConfig::BandMode::Pixels;
  for (int i = 0; i < 6; ++i) {
    BinaryMask a = random_mask(rng, 64, 64, 0.4), b = random_mask(rng, 64, 64, 0.4);
    for (int d : {1, 3}) {
      cfg.band_pixels = d;
      CHECK(boundary_iou(a, b, cfg) == biou_scan(a, b, d));
    }
  }
}

TEST_CASE("fractional band resolves against the diagonal, min 1") {
  MetricsConfig cfg;  // Fraction(0.02)
  CHECK(cfg.resolve_band(64, 64) == 2);    // round(0.02 * 90.5) = 2
  CHECK(cfg.resolve_band(32, 32) == 1);    // round(0.9) = 1
  CHECK(cfg.resolve_band(512, 512) == 14); // round(14.48)
  cfg.band_fraction = 0.001;
  CHECK(cfg.resolve_band(32, 32) == 1);  // clamped to minimum
}

TEST_CASE("evaluate_dataset: identical dirs give perfect scores") {
  std::mt19937_64 rng(6);
  auto truth = fresh_dir("truth_same");
  for (int i = 0; i < 5; ++i)
    write_mask(random_mask(rng, 16, 16), (truth / ("m" + std::to_string(i) + ".png")).string());
  MetricsReport rep = evaluate_dataset(truth.string(), truth.string());
  CHECK(rep.per_image.size() == 5);
  CHECK(rep.mean_iou == 1.0);
  CHECK(rep.mean_biou == 1.0);
}

TEST_CASE("evaluate_dataset: mean equals hand average; deterministic id order") {
  std::mt19937_64 rng(7);
  auto pred = fresh_dir("pred_avg");
  auto truth = fresh_dir("truth_avg");
  std::vector<BinaryMask> ps, ts;
  for (int i = 0; i < 10; ++i) {
    ps.push_back(random_mask(rng, 24, 24));
    ts.push_back(random_mask(rng, 24, 24));
    std::string id = "s" + std::to_string(i);
    write_mask(ps.back(), (pred / (id + ".png")).string());
    write_mask(ts.back(), (truth / (id + ".png")).string());
  }
  MetricsReport rep = evaluate_dataset(pred.string(), truth.string());
  REQUIRE(rep.per_image.size() == 10);
  double sum = 0.0;
  for (const auto& r : rep.per_image) sum += r.iou;
  CHECK(rep.mean_iou == doctest::Approx(sum / 10).epsilon(1e-12));
  for (std::size_t i = 1; i < rep.per_image.size(); ++i)
    CHECK(rep.per_image[i - 1].id < rep.per_image[i].id);
}

TEST_CASE("evaluate_dataset: unmatched files are an error naming the id") {
  std::mt19937_64 rng(8);
  auto pred = fresh_dir("pred_uneven");
  auto truth = fresh_dir("truth_uneven");
  write_mask(random_mask(rng, 8, 8), (pred / "a.png").string());
  write_mask(random_mask(rng, 8, 8), (pred / "b.png").string());
  write_mask(random_mask(rng, 8, 8), (truth / "a.png").string());
  CHECK_THROWS_WITH_AS(evaluate_dataset(pred.string(), truth.string()), doctest::Contains("b"),
                       IoError);
}

TEST_CASE("evaluate_dataset binarizes probability predictions") {
  auto pred = fresh_dir("pred_prob");
  auto truth = fresh_dir("truth_prob");
  ProbMap p(4, 4, 0.7f);
  write_probmap(p, (pred / "a.dpf").string());
  BinaryMask t(4, 4, 1);
  write_mask(t, (truth / "a.png").string());
  MetricsReport rep = evaluate_dataset(pred.string(), truth.string());
  CHECK(rep.mean_iou == 1.0);  // 0.7 >= 0.5 everywhere
}

TEST_CASE("report save/load round-trip") {
  MetricsReport rep;
  rep.per_image = {{"a", 0.5, 0.25, false}, {"b", 1.0, 1.0, true}};
  rep.recompute_means();
  auto path = (fresh_dir("report") / "rep.txt").string();
  save_report(rep, path);
  MetricsReport back = load_report(path);
  REQUIRE(back.per_image.size() == 2);
  CHECK(back.per_image[0].id == "a");
  CHECK(back.per_image[0].iou == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(back.per_image[1].vacuous);
  CHECK(back.mean_iou == doctest::Approx(rep.mean_iou).epsilon(1e-9));
}

TEST_CASE("compare_runs: identical reports give zero deltas") {
  MetricsReport rep;
  rep.per_image = {{"a", 0.5, 0.4, false}};
  rep.recompute_means();
  ComparisonTable t = compare_runs(rep, rep);
  CHECK(t.aggregate.delta_iou == 0.0);
  CHECK(t.aggregate.delta_biou == 0.0);
}

TEST_CASE("compare_runs reproduces a published-style delta") {
  MetricsReport base, enh;
  base.per_image = {{"unet", 0.7657, 0.6279, false}};
  enh.per_image = {{"unet", 0.7742, 0.6445, false}};
  base.recompute_means();
  enh.recompute_means();
  ComparisonTable t = compare_runs(base, enh);
  CHECK(t.aggregate.delta_iou == doctest::Approx(0.0085).epsilon(1e-9));
  CHECK(t.better_iou() == t.enhanced_label);
  std::string text = format_comparison(t, "U-Net");
  CHECK(text.find("0.7657") != std::string::npos);
  CHECK(text.find("0.7742") != std::string::npos);
}

TEST_CASE("compare_runs antisymmetry and sample-set checks") {
  MetricsReport a, b;
  a.per_image = {{"x", 0.3, 0.2, false}, {"y", 0.6, 0.5, false}};
  b.per_image = {{"x", 0.4, 0.1, false}, {"y", 0.7, 0.6, false}};
  a.recompute_means();
  b.recompute_means();
  ComparisonTable fwd = compare_runs(a, b), rev = compare_runs(b, a);
  CHECK(fwd.aggregate.delta_iou == doctest::Approx(-rev.aggregate.delta_iou));
  CHECK(fwd.aggregate.delta_biou == doctest::Approx(-rev.aggregate.delta_biou));

  MetricsReport c;
  c.per_image = {{"z", 0.3, 0.2, false}, {"y", 0.6, 0.5, false}};
  c.recompute_means();
  CHECK_THROWS_AS(compare_runs(a, c), std::invalid_argument);
}
