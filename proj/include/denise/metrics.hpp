#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "denise/io.hpp"
#include "denise/morphology.hpp"
#include "denise/raster.hpp"

namespace denise {

struct MetricsConfig {
  // Band width d for Boundary IoU: either a fraction of the image diagonal or
  // a fixed pixel count.
  enum class BandMode { Fraction, Pixels };
  BandMode band_mode = BandMode::Fraction;
  double band_fraction = 0.02;
  int band_pixels = 0;
  float eval_threshold = 0.5f;  // binarization of second-stage predictions

  void validate() const {
    if (band_mode == BandMode::Fraction && !(band_fraction > 0.0 && band_fraction < 1.0))
      throw std::invalid_argument("metrics: band fraction must be in (0,1)");
    if (band_mode == BandMode::Pixels && band_pixels < 1)
      throw std::invalid_argument("metrics: band pixel width must be >= 1");
  }

  int resolve_band(int width, int height) const {
    if (band_mode == BandMode::Pixels) return band_pixels;
    double diag = std::sqrt(static_cast<double>(width) * width +
                            static_cast<double>(height) * height);
    return std::max(1, static_cast<int>(std::lround(band_fraction * diag)));
  }

  std::string describe_band() const {
    std::ostringstream os;
    if (band_mode == BandMode::Pixels)
      os << "pixels:" << band_pixels;
    else
      os << "fraction:" << band_fraction;
    return os.str();
  }
};

struct PerImageMetrics {
  std::string id;
  double iou = 0.0;
  double biou = 0.0;
  bool vacuous = false;  // both masks empty, scored 1.0 by convention
};

struct MetricsReport {
  std::vector<PerImageMetrics> per_image;  // sorted by id
  double mean_iou = 0.0;
  double mean_biou = 0.0;
  MetricsConfig config;

  void recompute_means() {
    double si = 0.0, sb = 0.0;
    for (const auto& r : per_image) {
      si += r.iou;
      sb += r.biou;
    }
    mean_iou = per_image.empty() ? 0.0 : si / per_image.size();
    mean_biou = per_image.empty() ? 0.0 : sb / per_image.size();
  }
};

// |pred AND truth| / |pred OR truth|; both empty -> 1.0.
inline double iou(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw std::invalid_argument("iou: mask dimensions must match");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    inter += pred.bits[i] & truth.bits[i];
    uni += pred.bits[i] | truth.bits[i];
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// IoU of the Euclidean boundary bands of both masks.
inline double boundary_iou(const BinaryMask& pred, const BinaryMask& truth,
                           const MetricsConfig& cfg = {}) {
  if (pred.width != truth.width || pred.height != truth.height)
    throw std::invalid_argument("boundary_iou: mask dimensions must match");
  cfg.validate();
  int d = cfg.resolve_band(pred.width, pred.height);
  return iou(boundary_band(pred, d), boundary_band(truth, d));
}

namespace detail {

inline std::map<std::string, std::filesystem::path> index_rasters(
    const std::filesystem::path& dir) {
  std::map<std::string, std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir))
    throw IoError("no such directory: '" + dir.string() + "'");
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    if (ext == ".png" || ext == ".dpf") out[e.path().stem().string()] = e.path();
  }
  return out;
}

inline BinaryMask load_prediction_as_mask(const std::filesystem::path& p, float threshold) {
  ProbMap pm = read_probmap(p.string());
  BinaryMask m(pm.width, pm.height);
  for (std::size_t i = 0; i < pm.size(); ++i) m.bits[i] = pm.values[i] >= threshold ? 1 : 0;
  return m;
}

}  // namespace detail

// Per-image IoU/BIoU over matching filenames (stems) in two directories.
// Predictions may be probability maps (binarized at cfg.eval_threshold) or
// binary masks. Unmatched files on either side are an error.
inline MetricsReport evaluate_dataset(const std::string& pred_dir, const std::string& truth_dir,
                                      const MetricsConfig& cfg = {}) {
  cfg.validate();
  auto preds = detail::index_rasters(pred_dir);
  auto truths = detail::index_rasters(truth_dir);

  std::vector<std::string> missing;
  for (const auto& [id, p] : preds)
    if (!truths.count(id)) missing.push_back(id + " (no ground truth)");
  for (const auto& [id, p] : truths)
    if (!preds.count(id)) missing.push_back(id + " (no prediction)");
  if (!missing.empty()) {
    std::string msg = "evaluate_dataset: unmatched files:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }
  if (preds.empty()) throw IoError("evaluate_dataset: no matching files");

  MetricsReport rep;
  rep.config = cfg;
  for (const auto& [id, ppath] : preds) {
    BinaryMask pred = detail::load_prediction_as_mask(ppath, cfg.eval_threshold);
    BinaryMask truth = read_mask(truths.at(id).string());
    if (pred.width != truth.width || pred.height != truth.height)
      throw IoError("evaluate_dataset: dimension mismatch for sample '" + id + "'");
    PerImageMetrics m;
    m.id = id;
    m.iou = iou(pred, truth);
    m.biou = boundary_iou(pred, truth, cfg);
    m.vacuous = pred.count() == 0 && truth.count() == 0;
    rep.per_image.push_back(std::move(m));
  }
  rep.recompute_means();
  return rep;
}

inline void save_report(const MetricsReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.precision(6);
  out << std::fixed;
  out << "# denise metrics report\n";
  out << "# band " << rep.config.describe_band() << " eval_threshold "
      << rep.config.eval_threshold << "\n";
  out << "# mean_iou " << rep.mean_iou << " mean_biou " << rep.mean_biou << "\n";
  for (const auto& r : rep.per_image)
    out << r.id << " " << r.iou << " " << r.biou << (r.vacuous ? " vacuous" : "") << "\n";
}

inline MetricsReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  MetricsReport rep;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PerImageMetrics m;
    std::string flag;
    if (!(ls >> m.id >> m.iou >> m.biou))
      throw IoError("'" + path + "': malformed report line: " + line);
    if (ls >> flag && flag == "vacuous") m.vacuous = true;
    rep.per_image.push_back(std::move(m));
  }
  rep.recompute_means();
  return rep;
}

struct ComparisonRow {
  std::string id;
  double baseline_iou, enhanced_iou, delta_iou;
  double baseline_biou, enhanced_biou, delta_biou;
};

struct ComparisonTable {
  std::string baseline_label = "Standalone";
  std::string enhanced_label = "DeNISE";
  std::vector<ComparisonRow> rows;  // per-image
  ComparisonRow aggregate;          // means

  std::string better_iou() const {
    return aggregate.delta_iou > 0 ? enhanced_label
           : aggregate.delta_iou < 0 ? baseline_label
                                     : "tie";
  }
  std::string better_biou() const {
    return aggregate.delta_biou > 0 ? enhanced_label
           : aggregate.delta_biou < 0 ? baseline_label
                                      : "tie";
  }
};

// Side-by-side deltas between two runs over the same sample set.
inline ComparisonTable compare_runs(const MetricsReport& baseline, const MetricsReport& enhanced) {
  if (baseline.per_image.size() != enhanced.per_image.size())
    throw std::invalid_argument("compare_runs: reports cover different sample sets");
  ComparisonTable t;
  for (std::size_t i = 0; i < baseline.per_image.size(); ++i) {
    const auto& b = baseline.per_image[i];
    const auto& e = enhanced.per_image[i];
    if (b.id != e.id)
      throw std::invalid_argument("compare_runs: sample-id mismatch: '" + b.id + "' vs '" +
                                  e.id + "'");
    t.rows.push_back({b.id, b.iou, e.iou, e.iou - b.iou, b.biou, e.biou, e.biou - b.biou});
  }
  t.aggregate = {"mean",
                 baseline.mean_iou,
                 enhanced.mean_iou,
                 enhanced.mean_iou - baseline.mean_iou,
                 baseline.mean_biou,
                 enhanced.mean_biou,
                 enhanced.mean_biou - baseline.mean_biou};
  return t;
}

// Plain-text table with Model / Method / IoU / BIoU columns.
inline std::string format_comparison(const ComparisonTable& t, const std::string& model = "patch-classifier") {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed;
  os << "Model               Method              IoU      BIoU\n";
  os << model << std::string(model.size() < 20 ? 20 - model.size() : 1, ' ')
     << t.baseline_label << std::string(t.baseline_label.size() < 20 ? 20 - t.baseline_label.size() : 1, ' ')
     << t.aggregate.baseline_iou << "   " << t.aggregate.baseline_biou << "\n";
  os << model << std::string(model.size() < 20 ? 20 - model.size() : 1, ' ')
     << t.enhanced_label << std::string(t.enhanced_label.size() < 20 ? 20 - t.enhanced_label.size() : 1, ' ')
     << t.aggregate.enhanced_iou << "   " << t.aggregate.enhanced_biou << "\n";
  os << "delta" << std::string(15, ' ') << std::string(20, ' ');
  os << (t.aggregate.delta_iou >= 0 ? "+" : "") << t.aggregate.delta_iou << "  "
     << (t.aggregate.delta_biou >= 0 ? "+" : "") << t.aggregate.delta_biou << "\n";
  os << "better: IoU -> " << t.better_iou() << ", BIoU -> " << t.better_biou() << "\n";
  return os.str();
}

}  // namespace denise
