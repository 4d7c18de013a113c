#pragma once

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "denise/io.hpp"
#include "denise/raster.hpp"
#include "denise/synth.hpp"

namespace denise {

// Per-pixel logistic classifier over square patches of normalized channel
// values. Desk-scale stand-in for the deep segmentation nets; handles 3- and
// 4-channel input.
struct PatchClassifier {
  int patch_radius = 2;
  int channels = 3;
  std::vector<float> weights;  // channels*(2r+1)^2 features + trailing bias
  std::vector<float> channel_mean;
  std::vector<float> channel_std;

  int patch_side() const { return 2 * patch_radius + 1; }
  std::size_t feature_count() const {
    return static_cast<std::size_t>(channels) * patch_side() * patch_side();
  }
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 8;  // in images; a batch is all pixels of batch_size images
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  int patch_radius = 2;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(learning_rate > 0.0) && learning_rate != 0.0)
      throw std::invalid_argument("train: learning_rate must be >= 0");
  }
};

using Sample = std::pair<Raster, BinaryMask>;

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Patch features at (x,y): normalized unit-domain samples, raw zero padding
// outside the image (exterior = background).
inline void extract_features(const PatchClassifier& m, const Raster& unit_img, int x, int y,
                             std::vector<double>& out) {
  const int side = m.patch_side();
  std::size_t k = 0;
  for (int c = 0; c < m.channels; ++c) {
    const float mean = m.channel_mean[c];
    const float inv_std = 1.0f / m.channel_std[c];
    for (int dy = -m.patch_radius; dy <= m.patch_radius; ++dy)
      for (int dx = -m.patch_radius; dx <= m.patch_radius; ++dx) {
        int sx = x + dx, sy = y + dy;
        float v = (sx >= 0 && sy >= 0 && sx < unit_img.width && sy < unit_img.height)
                      ? unit_img.at(sx, sy, c)
                      : 0.0f;
        out[k++] = (v - mean) * inv_std;
      }
  }
  (void)side;
}

inline double logit(const PatchClassifier& m, const std::vector<double>& feat) {
  double z = m.weights.back();
  for (std::size_t i = 0; i < feat.size(); ++i) z += m.weights[i] * feat[i];
  return z;
}

// One pass over a batch: mean cross-entropy loss and its exact gradient.
inline double batch_loss_and_gradient(const PatchClassifier& m,
                                      const std::vector<const Sample*>& batch,
                                      std::vector<double>& grad) {
  grad.assign(m.weights.size(), 0.0);
  std::vector<double> feat(m.feature_count());
  double loss = 0.0;
  std::size_t n = 0;
  for (const Sample* s : batch) {
    const Raster unit_img = to_unit(s->first);
    for (int y = 0; y < unit_img.height; ++y)
      for (int x = 0; x < unit_img.width; ++x) {
        extract_features(m, unit_img, x, y, feat);
        double p = sigmoid(logit(m, feat));
        double label = s->second.at(x, y);
        double eps = 1e-12;
        loss -= label * std::log(p + eps) + (1.0 - label) * std::log(1.0 - p + eps);
        double err = p - label;
        for (std::size_t i = 0; i < feat.size(); ++i) grad[i] += err * feat[i];
        grad.back() += err;
        ++n;
      }
  }
  for (auto& g : grad) g /= static_cast<double>(n);
  return loss / static_cast<double>(n);
}

}  // namespace detail

struct TrainResult {
  PatchClassifier model;
  std::vector<double> epoch_loss;  // mean loss per epoch
};

inline TrainResult train(const std::vector<Sample>& dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  const int channels = dataset.front().first.channels;
  for (const auto& s : dataset) {
    if (s.first.channels != channels)
      throw std::invalid_argument("train: mixed channel counts in dataset");
    int min_side = 2 * cfg.patch_radius + 1;
    if (s.first.width < min_side || s.first.height < min_side)
      throw std::invalid_argument("train: image smaller than patch");
  }

  bool any0 = false, any1 = false;
  for (const auto& s : dataset)
    for (auto b : s.second.bits) (b ? any1 : any0) = true;
  if (!any0 || !any1)
    std::cerr << "train: warning: dataset contains a single class only\n";

  PatchClassifier m;
  m.patch_radius = cfg.patch_radius;
  m.channels = channels;
  m.channel_mean.assign(channels, 0.0f);
  m.channel_std.assign(channels, 1.0f);

  // per-channel normalization stats over the training set, unit domain
  std::vector<double> sum(channels, 0.0), sumsq(channels, 0.0);
  std::size_t npix = 0;
  for (const auto& s : dataset) {
    Raster u = to_unit(s.first);
    for (int c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < u.plane(); ++i) {
        double v = u.data[c * u.plane() + i];
        sum[c] += v;
        sumsq[c] += v * v;
      }
    npix += s.first.plane();
  }
  for (int c = 0; c < channels; ++c) {
    double mean = sum[c] / npix;
    double var = sumsq[c] / npix - mean * mean;
    m.channel_mean[c] = static_cast<float>(mean);
    m.channel_std[c] = static_cast<float>(var > 1e-12 ? std::sqrt(var) : 1.0);
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<float> init(-0.01f, 0.01f);
  m.weights.assign(m.feature_count() + 1, 0.0f);
  for (std::size_t i = 0; i < m.feature_count(); ++i) m.weights[i] = init(rng);
  m.weights.back() = 0.0f;  // bias

  TrainResult res;
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<double> grad;

  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      std::vector<const Sample*> batch;
      for (std::size_t i = b; i < std::min(order.size(), b + cfg.batch_size); ++i)
        batch.push_back(&dataset[order[i]]);
      double loss = detail::batch_loss_and_gradient(m, batch, grad);
      for (std::size_t i = 0; i < m.weights.size(); ++i)
        m.weights[i] -= static_cast<float>(cfg.learning_rate * grad[i]);
      epoch_loss += loss;
      ++batches;
    }
    res.epoch_loss.push_back(epoch_loss / batches);
  }
  res.model = std::move(m);
  return res;
}

// Exact analytic gradient of mean cross-entropy over all pixels of the batch.
inline std::vector<double> loss_gradient(const PatchClassifier& m,
                                         const std::vector<Sample>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_gradient: empty batch");
  std::vector<const Sample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  std::vector<double> grad;
  detail::batch_loss_and_gradient(m, ptrs, grad);
  return grad;
}

inline double batch_loss(const PatchClassifier& m, const std::vector<Sample>& batch) {
  std::vector<const Sample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  std::vector<double> grad;
  return detail::batch_loss_and_gradient(m, ptrs, grad);
}

inline ProbMap predict(const PatchClassifier& m, const Raster& image) {
  if (image.channels != m.channels)
    throw std::invalid_argument("predict: channel count does not match model");
  const Raster unit_img = to_unit(image);
  ProbMap out(image.width, image.height);
  std::vector<double> feat(m.feature_count());
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      detail::extract_features(m, unit_img, x, y, feat);
      double p = detail::sigmoid(detail::logit(m, feat));
      out.at(x, y) = static_cast<float>(std::clamp(p, 1e-7, 1.0 - 1e-7));
    }
  return out;
}

// 3x3 Sobel magnitude on luminance, replicate padding, normalized to [0,1] by
// the per-image max. A constant image maps to all zeros.
inline ProbMap sobel_edges(const Raster& image) {
  if (image.channels != 3) throw std::invalid_argument("sobel_edges: image must be 3-channel");
  const Raster u = to_unit(image);
  ProbMap lum(u.width, u.height);
  for (std::size_t i = 0; i < lum.size(); ++i)
    lum.values[i] = (u.data[i] + u.data[u.plane() + i] + u.data[2 * u.plane() + i]) / 3.0f;

  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, lum.width - 1);
    y = std::clamp(y, 0, lum.height - 1);
    return static_cast<double>(lum.at(x, y));
  };

  ProbMap out(u.width, u.height);
  double maxv = 0.0;
  for (int y = 0; y < u.height; ++y)
    for (int x = 0; x < u.width; ++x) {
      double gx = -at(x - 1, y - 1) + at(x + 1, y - 1) - 2 * at(x - 1, y) + 2 * at(x + 1, y) -
                  at(x - 1, y + 1) + at(x + 1, y + 1);
      double gy = -at(x - 1, y - 1) - 2 * at(x, y - 1) - at(x + 1, y - 1) + at(x - 1, y + 1) +
                  2 * at(x, y + 1) + at(x + 1, y + 1);
      double mag = std::sqrt(gx * gx + gy * gy);
      out.at(x, y) = static_cast<float>(mag);
      maxv = std::max(maxv, mag);
    }
  if (maxv > 0.0)
    for (auto& v : out.values) v = static_cast<float>(v / maxv);
  return out;
}

// Model checkpoint, little-endian:
//   magic "DNW1", u32 patch_radius, u32 channels, u32 weight count,
//   float32 weights, float32 means, float32 stds.
inline void save_checkpoint(const PatchClassifier& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  auto w32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  out.write("DNW1", 4);
  w32(static_cast<std::uint32_t>(m.patch_radius));
  w32(static_cast<std::uint32_t>(m.channels));
  w32(static_cast<std::uint32_t>(m.weights.size()));
  out.write(reinterpret_cast<const char*>(m.weights.data()),
            static_cast<std::streamsize>(m.weights.size() * 4));
  out.write(reinterpret_cast<const char*>(m.channel_mean.data()),
            static_cast<std::streamsize>(m.channel_mean.size() * 4));
  out.write(reinterpret_cast<const char*>(m.channel_std.data()),
            static_cast<std::streamsize>(m.channel_std.size() * 4));
  if (!out) throw IoError("'" + path + "': checkpoint write failure");
}

inline PatchClassifier load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[4];
  std::uint32_t radius = 0, channels = 0, nw = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&radius), 4);
  in.read(reinterpret_cast<char*>(&channels), 4);
  in.read(reinterpret_cast<char*>(&nw), 4);
  if (!in || std::memcmp(magic, "DNW1", 4) != 0)
    throw IoError("'" + path + "': corrupt checkpoint header");
  PatchClassifier m;
  m.patch_radius = static_cast<int>(radius);
  m.channels = static_cast<int>(channels);
  if (nw != m.feature_count() + 1)
    throw IoError("'" + path + "': weight count does not match patch geometry");
  m.weights.resize(nw);
  m.channel_mean.resize(channels);
  m.channel_std.resize(channels);
  in.read(reinterpret_cast<char*>(m.weights.data()), static_cast<std::streamsize>(nw * 4));
  in.read(reinterpret_cast<char*>(m.channel_mean.data()),
          static_cast<std::streamsize>(channels * 4));
  in.read(reinterpret_cast<char*>(m.channel_std.data()),
          static_cast<std::streamsize>(channels * 4));
  if (!in) throw IoError("'" + path + "': truncated checkpoint");
  return m;
}

// One prediction file per manifest id (<id>.dpf or <id>.png); grayscale PNG
// maps to probabilities via v/255. Missing ids and dimension mismatches are
// fatal, reported together.
inline std::map<std::string, ProbMap> ingest_predictions(const std::string& dir,
                                                         const DatasetManifest& man) {
  namespace fs = std::filesystem;
  std::map<std::string, ProbMap> out;
  std::vector<std::string> missing, mismatched;
  for (const auto& e : man.entries) {
    fs::path dpf = fs::path(dir) / (e.id + ".dpf");
    fs::path png = fs::path(dir) / (e.id + ".png");
    fs::path src = fs::exists(dpf) ? dpf : png;
    if (!fs::exists(src)) {
      missing.push_back(e.id);
      continue;
    }
    ProbMap p = read_probmap(src.string());
    Raster img = read_raster((man.root / e.image_path).string());
    if (p.width != img.width || p.height != img.height) {
      mismatched.push_back(e.id);
      continue;
    }
    out.emplace(e.id, std::move(p));
  }
  if (!missing.empty() || !mismatched.empty()) {
    std::string msg = "ingest_predictions:";
    if (!missing.empty()) {
      msg += " missing ids:";
      for (const auto& id : missing) msg += " " + id;
    }
    if (!mismatched.empty()) {
      msg += " dimension mismatch:";
      for (const auto& id : mismatched) msg += " " + id;
    }
    throw IoError(msg);
  }
  return out;
}

}  // namespace denise
