#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "denise/enhance.hpp"
#include "denise/metrics.hpp"
#include "denise/refmodels.hpp"
#include "denise/synth.hpp"

namespace denise {

// First-stage model selection: an internally trained classifier, the gradient
// edge detector, or externally supplied prediction files.
struct Stage1 {
  enum class Kind { Classifier, Sobel, External };
  Kind kind = Kind::Classifier;
  std::string external_dir;

  static Stage1 parse(const std::string& s) {
    if (s == "classifier") return {Kind::Classifier, {}};
    if (s == "sobel") return {Kind::Sobel, {}};
    if (s.rfind("external:", 0) == 0) return {Kind::External, s.substr(9)};
    throw std::invalid_argument("stage1 must be classifier, sobel or external:<dir>");
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Classifier: return "classifier";
      case Kind::Sobel: return "sobel";
      default: return "external:" + external_dir;
    }
  }
};

struct PipelineConfig {
  EnhanceConfig enhance;
  TrainConfig train_cfg;
  MetricsConfig metrics;
  Stage1 stage1;
  std::string run_dir;
  std::string run_id = "run";
  bool baseline_only = false;

  std::string echo() const {
    std::ostringstream os;
    os << "run_id=" << run_id << " stage1=" << stage1.describe() << " variant="
       << (enhance.variant == EnhanceConfig::Variant::Seg ? "seg" : "edge") << " mode="
       << (enhance.mode == EnhanceConfig::Mode::Merge3 ? "merge3" : "concat4")
       << " threshold=" << enhance.threshold << " clip=" << enhance.clip_low << ".."
       << enhance.clip_high << " dilation=" << enhance.dilation_radius
       << " epochs=" << train_cfg.epochs << " batch=" << train_cfg.batch_size
       << " lr=" << train_cfg.learning_rate << " seed=" << train_cfg.seed
       << " band=" << metrics.describe_band() << " eval_threshold=" << metrics.eval_threshold
       << " baseline_only=" << (baseline_only ? 1 : 0);
    return os.str();
  }
};

struct PipelineResult {
  MetricsReport baseline;
  MetricsReport enhanced;  // empty when baseline_only
  ComparisonTable table;
  std::string table_text;
};

namespace detail {

inline std::vector<Sample> load_split(const DatasetManifest& man, Split s) {
  std::vector<Sample> out;
  for (const auto& e : man.split(s))
    out.emplace_back(read_raster((man.root / e.image_path).string()),
                     read_mask((man.root / e.mask_path).string()));
  return out;
}

}  // namespace detail

// First-stage prediction for every manifest entry, keyed by sample id.
inline std::map<std::string, ProbMap> stage1_predictions(const DatasetManifest& man,
                                                         const Stage1& s1,
                                                         const TrainConfig& tcfg) {
  std::map<std::string, ProbMap> out;
  switch (s1.kind) {
    case Stage1::Kind::External:
      return ingest_predictions(s1.external_dir, man);
    case Stage1::Kind::Sobel:
      for (const auto& e : man.entries)
        out.emplace(e.id, sobel_edges(read_raster((man.root / e.image_path).string())));
      return out;
    case Stage1::Kind::Classifier: {
      auto trained = train(detail::load_split(man, Split::Train), tcfg);
      for (const auto& e : man.entries)
        out.emplace(e.id, predict(trained.model, read_raster((man.root / e.image_path).string())));
      return out;
    }
  }
  return out;
}

// Applies enhance_sample over every entry and materializes the enhanced
// dataset (PNG for Merge3, DPF for Concat4) with a provenance line per sample
// in the manifest.
inline DatasetManifest enhance_dataset(const DatasetManifest& man,
                                       const std::map<std::string, ProbMap>& preds,
                                       const EnhanceConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "masks");

  std::vector<std::string> missing;
  for (const auto& e : man.entries)
    if (!preds.count(e.id)) missing.push_back(e.id);
  if (!missing.empty()) {
    std::string msg = "enhance_dataset: no prediction for ids:";
    for (const auto& id : missing) msg += " " + id;
    throw IoError(msg);
  }

  DatasetManifest out;
  out.root = fs::path(out_dir);
  out.seed = man.seed;
  out.config_echo = man.config_echo;
  std::ostringstream prov;
  const bool concat = cfg.mode == EnhanceConfig::Mode::Concat4;
  for (const auto& e : man.entries) {
    Raster img = read_raster((man.root / e.image_path).string());
    BinaryMask mask = read_mask((man.root / e.mask_path).string());
    EnhancedSample s = enhance_sample(img, preds.at(e.id), mask, cfg, e.id);
    ManifestEntry ne = e;
    ne.image_path = std::string("images/") + e.id + (concat ? ".dpf" : ".png");
    ne.mask_path = "masks/" + e.id + ".png";
    write_raster(concat ? to_unit(s.image) : s.image, (out.root / ne.image_path).string());
    write_mask(s.mask, (out.root / ne.mask_path).string());
    prov << "# prov " << e.id << " source=" << e.id << " "
         << (cfg.variant == EnhanceConfig::Variant::Seg ? "seg" : "edge") << "/"
         << (concat ? "concat4" : "merge3") << " t=" << cfg.threshold << " clip="
         << cfg.clip_low << ".." << cfg.clip_high << " dilation=" << cfg.dilation_radius
         << "\n";
    out.entries.push_back(std::move(ne));
  }
  save_manifest(out, (out.root / "manifest.txt").string());
  std::ofstream append((out.root / "manifest.txt").string(), std::ios::app);
  append << prov.str();
  return out;
}

namespace detail {

// Writes test-split predictions and ground truth side by side, then scores
// them through the directory-based evaluator.
inline MetricsReport eval_leg(const DatasetManifest& man, const PatchClassifier& model,
                              const MetricsConfig& mcfg, const std::string& run_dir,
                              const std::string& leg) {
  namespace fs = std::filesystem;
  fs::path pred_dir = fs::path(run_dir) / (leg + "_preds");
  fs::path truth_dir = fs::path(run_dir) / (leg + "_truth");
  fs::create_directories(pred_dir);
  fs::create_directories(truth_dir);
  for (const auto& e : man.split(Split::Test)) {
    Raster img = read_raster((man.root / e.image_path).string());
    write_probmap(predict(model, img), (pred_dir / (e.id + ".dpf")).string());
    fs::copy_file(man.root / e.mask_path, truth_dir / (e.id + ".png"),
                  fs::copy_options::overwrite_existing);
  }
  MetricsReport rep = evaluate_dataset(pred_dir.string(), truth_dir.string(), mcfg);
  save_report(rep, (fs::path(run_dir) / (leg + "_report.txt")).string());
  return rep;
}

}  // namespace detail

// Full two-stage flow: baseline leg (classifier on raw data) plus, unless
// baseline_only, the enhancement leg (stage-1 predictions -> enhanced dataset
// -> stage-2 classifier), both evaluated on the test split.
inline PipelineResult run_pipeline(const DatasetManifest& man, const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(cfg.run_dir);

  PipelineResult res;

  auto baseline_trained = train(detail::load_split(man, Split::Train), cfg.train_cfg);
  save_checkpoint(baseline_trained.model, (fs::path(cfg.run_dir) / "baseline_model.dnw").string());
  res.baseline = detail::eval_leg(man, baseline_trained.model, cfg.metrics, cfg.run_dir, "baseline");

  if (!cfg.baseline_only) {
    auto preds = stage1_predictions(man, cfg.stage1, cfg.train_cfg);
    DatasetManifest enhanced_man =
        enhance_dataset(man, preds, cfg.enhance, (fs::path(cfg.run_dir) / "enhanced").string());
    auto enhanced_trained = train(detail::load_split(enhanced_man, Split::Train), cfg.train_cfg);
    save_checkpoint(enhanced_trained.model,
                    (fs::path(cfg.run_dir) / "enhanced_model.dnw").string());
    res.enhanced =
        detail::eval_leg(enhanced_man, enhanced_trained.model, cfg.metrics, cfg.run_dir, "enhanced");

    res.table = compare_runs(res.baseline, res.enhanced);
    res.table.enhanced_label = cfg.enhance.variant == EnhanceConfig::Variant::Seg
                                   ? "Seg-DeNISE"
                                   : "Edge-DeNISE";
    res.table.enhanced_label += cfg.enhance.mode == EnhanceConfig::Mode::Merge3
                                    ? " (3-channels)"
                                    : " (4-channels)";
    res.table_text = format_comparison(res.table);
    std::ofstream table_out((fs::path(cfg.run_dir) / "comparison.txt").string());
    table_out << res.table_text;
  }

  auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ofstream log((fs::path(cfg.run_dir) / "run.log").string());
  log << "config " << cfg.echo() << "\n";
  log << "dataset " << man.config_echo << "\n";
  log << "entries " << man.entries.size() << "\n";
  log << "wall_seconds " << dt << "\n";
  return res;
}

}  // namespace denise
