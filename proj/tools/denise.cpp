// Command-line front end for the two-stage enhancement pipeline.
//
// Subcommands: synth, train, predict, enhance, eval, pipeline, compare.
// Exit codes: 0 success, 2 config error, 3 missing input, 4 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "denise/pipeline.hpp"

namespace fs = std::filesystem;
using namespace denise;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitInternal = 4;

std::string default_run_root() {
  const char* env = std::getenv("DENISE_RUN_ROOT");
  return env ? env : "runs";
}

void write_run_log(const std::string& dir, const std::string& command, const std::string& echo,
                   double wall_seconds) {
  fs::create_directories(dir);
  std::ofstream log(fs::path(dir) / (command + ".log"));
  log << "command " << command << "\n";
  log << "config " << echo << "\n";
  log << "wall_seconds " << wall_seconds << "\n";
}

struct EnhanceArgs {
  std::string variant = "seg";
  std::string mode = "merge3";
  float threshold = 0.5f;
  float clip_low = 0.5f;
  float clip_high = 1.0f;
  int dilation_radius = 15;
  bool preprocess_channel4 = false;

  void add_to(CLI::App& app) {
    app.add_option("--variant", variant, "Enhancement variant: seg or edge")
        ->check(CLI::IsMember({"seg", "edge"}));
    app.add_option("--mode", mode, "Fusion mode: merge3 or concat4")
        ->check(CLI::IsMember({"merge3", "concat4"}));
    app.add_option("--threshold", threshold, "Prediction binarization threshold");
    app.add_option("--clip-low", clip_low, "Lower clip bound for the multiplier");
    app.add_option("--clip-high", clip_high, "Upper clip bound for the multiplier");
    app.add_option("--dilation-radius", dilation_radius, "Square dilation radius (seg variant)");
    app.add_flag("--preprocess-channel4", preprocess_channel4,
                 "Threshold/dilate/clip the 4th channel instead of raw probabilities");
  }

  EnhanceConfig to_config() const {
    EnhanceConfig cfg;
    cfg.variant = variant == "seg" ? EnhanceConfig::Variant::Seg : EnhanceConfig::Variant::Edge;
    cfg.mode = mode == "merge3" ? EnhanceConfig::Mode::Merge3 : EnhanceConfig::Mode::Concat4;
    cfg.threshold = threshold;
    cfg.clip_low = clip_low;
    cfg.clip_high = clip_high;
    cfg.dilation_radius = dilation_radius;
    cfg.preprocess_channel4 = preprocess_channel4;
    cfg.validate();
    return cfg;
  }
};

struct TrainArgs {
  int epochs = 20;
  int batch_size = 8;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  int patch_radius = 2;

  void add_to(CLI::App& app) {
    app.add_option("--epochs", epochs, "Training epochs");
    app.add_option("--batch-size", batch_size, "Batch size in images");
    app.add_option("--lr", learning_rate, "Learning rate");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--patch-radius", patch_radius, "Classifier patch radius");
  }

  TrainConfig to_config() const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.learning_rate = learning_rate;
    cfg.seed = seed;
    cfg.patch_radius = patch_radius;
    cfg.validate();
    return cfg;
  }
};

struct MetricsArgs {
  double band_fraction = 0.02;
  int band_pixels = 0;
  float eval_threshold = 0.5f;

  void add_to(CLI::App& app) {
    app.add_option("--band-fraction", band_fraction,
                   "Boundary band width as a fraction of the image diagonal");
    app.add_option("--band-pixels", band_pixels, "Boundary band width in pixels (overrides fraction)");
    app.add_option("--eval-threshold", eval_threshold, "Binarization threshold for predictions");
  }

  MetricsConfig to_config() const {
    MetricsConfig cfg;
    if (band_pixels > 0) {
      cfg.band_mode = MetricsConfig::BandMode::Pixels;
      cfg.band_pixels = band_pixels;
    } else {
      cfg.band_fraction = band_fraction;
    }
    cfg.eval_threshold = eval_threshold;
    cfg.validate();
    return cfg;
  }
};

std::vector<Sample> load_split_samples(const DatasetManifest& man, const std::string& split) {
  std::vector<Sample> out;
  for (const auto& e : man.split(split_from_name(split)))
    out.emplace_back(read_raster((man.root / e.image_path).string()),
                     read_mask((man.root / e.mask_path).string()));
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"denise: two-stage data enhancement for building segmentation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file (flags win)");
  app.allow_config_extras(true);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with splits");
  std::string synth_out;
  int synth_n = 100;
  SceneConfig scene;
  double r_train = 0.8, r_val = 0.1, r_test = 0.1;
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("-n,--count", synth_n, "Number of images");
  synth->add_option("--image-size", scene.image_size, "Image side length");
  synth->add_option("--min-buildings", scene.min_buildings, "Min buildings per image");
  synth->add_option("--max-buildings", scene.max_buildings, "Max buildings per image");
  synth->add_option("--noise-std", scene.noise_std, "Brightness noise sigma");
  synth->add_option("--occlusion-prob", scene.occlusion_prob, "Per-building occlusion probability");
  synth->add_option("--occlusion-max-fraction", scene.occlusion_max_fraction,
                    "Max occluded fraction of a footprint");
  synth->add_option("--shadow-prob", scene.shadow_prob, "Per-building shadow probability");
  synth->add_option("--seed", scene.seed, "Generator seed");
  synth->add_option("--train-ratio", r_train, "Train split ratio");
  synth->add_option("--val-ratio", r_val, "Val split ratio");
  synth->add_option("--test-ratio", r_test, "Test split ratio");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a patch classifier on a manifest split");
  std::string train_manifest, train_split = "train", train_out;
  TrainArgs train_args;
  train_cmd->add_option("--manifest", train_manifest, "Dataset manifest")->required();
  train_cmd->add_option("--split", train_split, "Split to train on")
      ->check(CLI::IsMember({"train", "val", "test"}));
  train_cmd->add_option("--out", train_out, "Checkpoint output path")->required();
  train_args.add_to(*train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Write per-sample prediction maps for a split");
  std::string pred_manifest, pred_split = "test", pred_out, pred_model, pred_stage1 = "classifier";
  predict_cmd->add_option("--manifest", pred_manifest, "Dataset manifest")->required();
  predict_cmd->add_option("--split", pred_split, "Split to predict")
      ->check(CLI::IsMember({"train", "val", "test", "all"}));
  predict_cmd->add_option("--out", pred_out, "Output prediction directory")->required();
  predict_cmd->add_option("--model", pred_model, "Checkpoint (for --stage1 classifier)");
  predict_cmd->add_option("--stage1", pred_stage1, "classifier or sobel");

  // enhance
  auto* enhance_cmd = app.add_subcommand("enhance", "Apply enhancement over a manifest");
  std::string enh_manifest, enh_preds, enh_out;
  EnhanceArgs enh_args;
  enhance_cmd->add_option("--manifest", enh_manifest, "Dataset manifest")->required();
  enhance_cmd->add_option("--predictions", enh_preds, "Stage-1 prediction directory")->required();
  enhance_cmd->add_option("--out", enh_out, "Enhanced dataset directory")->required();
  enh_args.add_to(*enhance_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score predictions against ground truth");
  std::string eval_pred, eval_truth, eval_out;
  MetricsArgs eval_args;
  eval_cmd->add_option("--predictions", eval_pred, "Prediction directory")->required();
  eval_cmd->add_option("--truth", eval_truth, "Ground-truth mask directory")->required();
  eval_cmd->add_option("--out", eval_out, "Report output path")->required();
  eval_args.add_to(*eval_cmd);

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Compare two metric reports");
  std::string cmp_baseline, cmp_enhanced, cmp_out, cmp_model = "patch-classifier";
  compare_cmd->add_option("--baseline", cmp_baseline, "Baseline report")->required();
  compare_cmd->add_option("--enhanced", cmp_enhanced, "Enhanced report")->required();
  compare_cmd->add_option("--out", cmp_out, "Table output path (stdout if omitted)");
  compare_cmd->add_option("--model", cmp_model, "Model label for the table");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Full two-stage flow with a baseline leg");
  std::string pipe_manifest, pipe_run_dir, pipe_run_id = "run", pipe_stage1 = "sobel";
  bool pipe_baseline_only = false;
  EnhanceArgs pipe_enh;
  TrainArgs pipe_train;
  MetricsArgs pipe_metrics;
  pipe_cmd->add_option("--manifest", pipe_manifest, "Dataset manifest")->required();
  pipe_cmd->add_option("--run-dir", pipe_run_dir, "Run directory (default under run root)");
  pipe_cmd->add_option("--run-id", pipe_run_id, "Run identifier");
  pipe_cmd->add_option("--stage1", pipe_stage1, "classifier, sobel or external:<dir>");
  pipe_cmd->add_flag("--baseline-only", pipe_baseline_only, "Skip the enhancement leg");
  pipe_enh.add_to(*pipe_cmd);
  pipe_train.add_to(*pipe_cmd);
  pipe_metrics.add_to(*pipe_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  }
  auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (synth->parsed()) {
    scene.validate();
    DatasetManifest man = generate_dataset(scene, synth_n, synth_out);
    man = split_dataset(man, r_train, r_val, r_test, scene.seed);
    save_manifest(man, (fs::path(synth_out) / "manifest.txt").string());
    write_run_log(synth_out, "synth", scene.echo(), wall());
    std::cout << "wrote " << man.entries.size() << " samples to " << synth_out << "\n";
  } else if (train_cmd->parsed()) {
    DatasetManifest man = load_manifest(train_manifest);
    TrainConfig cfg = train_args.to_config();
    TrainResult res = train(load_split_samples(man, train_split), cfg);
    save_checkpoint(res.model, train_out);
    write_run_log(fs::path(train_out).parent_path().string(), "train",
                  "manifest=" + train_manifest + " split=" + train_split + " epochs=" +
                      std::to_string(cfg.epochs) + " lr=" + std::to_string(cfg.learning_rate) +
                      " seed=" + std::to_string(cfg.seed),
                  wall());
    std::cout << "checkpoint " << train_out << " final_loss " << res.epoch_loss.back() << "\n";
  } else if (predict_cmd->parsed()) {
    DatasetManifest man = load_manifest(pred_manifest);
    fs::create_directories(pred_out);
    PatchClassifier model;
    if (pred_stage1 == "classifier") {
      if (pred_model.empty())
        throw CLI::ValidationError("--model is required with --stage1 classifier");
      model = load_checkpoint(pred_model);
    } else if (pred_stage1 != "sobel") {
      throw CLI::ValidationError("predict --stage1 must be classifier or sobel");
    }
    int written = 0;
    for (const auto& e : man.entries) {
      if (pred_split != "all" && e.split != split_from_name(pred_split)) continue;
      Raster img = read_raster((man.root / e.image_path).string());
      ProbMap p = pred_stage1 == "sobel" ? sobel_edges(img) : predict(model, img);
      write_probmap(p, (fs::path(pred_out) / (e.id + ".dpf")).string());
      ++written;
    }
    write_run_log(pred_out, "predict",
                  "manifest=" + pred_manifest + " split=" + pred_split + " stage1=" + pred_stage1,
                  wall());
    std::cout << "wrote " << written << " prediction maps to " << pred_out << "\n";
  } else if (enhance_cmd->parsed()) {
    DatasetManifest man = load_manifest(enh_manifest);
    auto preds = ingest_predictions(enh_preds, man);
    DatasetManifest em = enhance_dataset(man, preds, enh_args.to_config(), enh_out);
    write_run_log(enh_out, "enhance",
                  "manifest=" + enh_manifest + " predictions=" + enh_preds + " variant=" +
                      enh_args.variant + " mode=" + enh_args.mode,
                  wall());
    std::cout << "enhanced " << em.entries.size() << " samples into " << enh_out << "\n";
  } else if (eval_cmd->parsed()) {
    MetricsReport rep = evaluate_dataset(eval_pred, eval_truth, eval_args.to_config());
    save_report(rep, eval_out);
    write_run_log(fs::path(eval_out).parent_path().string(), "eval",
                  "predictions=" + eval_pred + " truth=" + eval_truth, wall());
    std::cout << "mean_iou " << rep.mean_iou << " mean_biou " << rep.mean_biou << "\n";
  } else if (compare_cmd->parsed()) {
    ComparisonTable t = compare_runs(load_report(cmp_baseline), load_report(cmp_enhanced));
    std::string text = format_comparison(t, cmp_model);
    if (cmp_out.empty()) {
      std::cout << text;
    } else {
      std::ofstream(cmp_out) << text;
      std::cout << "wrote " << cmp_out << "\n";
    }
  } else if (pipe_cmd->parsed()) {
    DatasetManifest man = load_manifest(pipe_manifest);
    PipelineConfig cfg;
    cfg.enhance = pipe_enh.to_config();
    cfg.train_cfg = pipe_train.to_config();
    cfg.metrics = pipe_metrics.to_config();
    cfg.stage1 = Stage1::parse(pipe_stage1);
    cfg.run_id = pipe_run_id;
    cfg.baseline_only = pipe_baseline_only;
    cfg.run_dir = pipe_run_dir.empty()
                      ? (fs::path(default_run_root()) / pipe_run_id).string()
                      : pipe_run_dir;
    PipelineResult res = run_pipeline(man, cfg);
    if (pipe_baseline_only)
      std::cout << "baseline mean_iou " << res.baseline.mean_iou << " mean_biou "
                << res.baseline.mean_biou << "\n";
    else
      std::cout << res.table_text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "missing or unreadable input: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
