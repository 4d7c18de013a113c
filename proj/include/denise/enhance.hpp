#pragma once

#include <stdexcept>
#include <string>

#include "denise/morphology.hpp"
#include "denise/raster.hpp"

namespace denise {

struct EnhanceConfig {
  enum class Variant { Seg, Edge };
  enum class Mode { Merge3, Concat4 };

  Variant variant = Variant::Seg;
  Mode mode = Mode::Merge3;
  float threshold = 0.5f;
  float clip_low = 0.5f;
  float clip_high = 1.0f;
  int dilation_radius = 15;  // Seg variant only
  bool preprocess_channel4 = false;

  void validate() const {
    if (!(threshold > 0.0f && threshold <= 1.0f))
      throw std::invalid_argument("enhance: threshold must be in (0,1]");
    if (!(clip_low >= 0.0f && clip_low < clip_high && clip_high <= 1.0f))
      throw std::invalid_argument("enhance: need 0 <= clip_low < clip_high <= 1");
    if (dilation_radius < 0)
      throw std::invalid_argument("enhance: dilation_radius must be >= 0");
  }
};

struct EnhancedSample {
  Raster image;  // 3 (Merge3) or 4 (Concat4) channels
  BinaryMask mask;  // ground truth, untouched
  EnhanceConfig config;
  std::string source_id;
};

// pixel = 1 iff prob >= t
inline BinaryMask threshold_probs(const ProbMap& probs, float t) {
  BinaryMask m(probs.width, probs.height);
  for (std::size_t i = 0; i < probs.size(); ++i) m.bits[i] = probs.values[i] >= t ? 1 : 0;
  return m;
}

namespace detail {

inline ProbMap clip_mask(const BinaryMask& m, float lo, float hi) {
  ProbMap out(m.width, m.height);
  for (std::size_t i = 0; i < m.size(); ++i) out.values[i] = m.bits[i] ? hi : lo;
  return out;
}

}  // namespace detail

// threshold -> dilate by Square(radius) -> clip to [clip_low, clip_high].
// Binary input to clip makes the output exactly two-valued.
inline ProbMap build_multiplier_seg(const ProbMap& probs, const EnhanceConfig& cfg) {
  cfg.validate();
  BinaryMask m = threshold_probs(probs, cfg.threshold);
  if (cfg.dilation_radius > 0)
    m = dilate(m, StructuringElement::square(cfg.dilation_radius));
  return detail::clip_mask(m, cfg.clip_low, cfg.clip_high);
}

// threshold -> clip, no dilation.
inline ProbMap build_multiplier_edge(const ProbMap& grads, const EnhanceConfig& cfg) {
  cfg.validate();
  return detail::clip_mask(threshold_probs(grads, cfg.threshold), cfg.clip_low, cfg.clip_high);
}

// Per-channel v' = round_u8(to_unit(v) * m). Output U8; m = 1.0 pixels are
// bit-identical to the input.
inline Raster merge3(const Raster& image, const ProbMap& multiplier) {
  if (image.channels != 3) throw std::invalid_argument("merge3: image must be 3-channel");
  if (image.width != multiplier.width || image.height != multiplier.height)
    throw std::invalid_argument("merge3: multiplier dimensions must match image");
  const Raster unit = to_unit(image);
  Raster out(image.width, image.height, 3, Domain::U8);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < multiplier.size(); ++i)
      out.data[c * out.plane() + i] = static_cast<float>(round_u8(
          static_cast<double>(unit.data[c * unit.plane() + i]) * multiplier.values[i]));
  return out;
}

// Channels 0-2 bit-identical to input; channel 3 = raw probabilities in the
// image's domain. No thresholding, dilation or clipping here.
inline Raster concat4(const Raster& image, const ProbMap& probs) {
  if (image.channels != 3) throw std::invalid_argument("concat4: image must be 3-channel");
  if (image.width != probs.width || image.height != probs.height)
    throw std::invalid_argument("concat4: probs dimensions must match image");
  Raster out(image.width, image.height, 4, image.domain);
  std::copy(image.data.begin(), image.data.end(), out.data.begin());
  for (std::size_t i = 0; i < probs.size(); ++i)
    out.data[3 * out.plane() + i] =
        image.domain == Domain::U8 ? static_cast<float>(round_u8(probs.values[i]))
                                   : probs.values[i];
  return out;
}

inline EnhancedSample enhance_sample(const Raster& image, const ProbMap& prediction,
                                     const BinaryMask& mask, const EnhanceConfig& cfg,
                                     std::string source_id = {}) {
  cfg.validate();
  if (image.width != prediction.width || image.height != prediction.height ||
      image.width != mask.width || image.height != mask.height)
    throw std::invalid_argument("enhance_sample: image/prediction/mask dimensions must agree");
  EnhancedSample out;
  out.mask = mask;
  out.config = cfg;
  out.source_id = std::move(source_id);
  if (cfg.mode == EnhanceConfig::Mode::Merge3) {
    ProbMap mult = cfg.variant == EnhanceConfig::Variant::Seg
                       ? build_multiplier_seg(prediction, cfg)
                       : build_multiplier_edge(prediction, cfg);
    out.image = merge3(image, mult);
  } else {
    if (cfg.preprocess_channel4) {
      ProbMap mult = cfg.variant == EnhanceConfig::Variant::Seg
                         ? build_multiplier_seg(prediction, cfg)
                         : build_multiplier_edge(prediction, cfg);
      out.image = concat4(image, mult);
    } else {
      out.image = concat4(image, prediction);
    }
  }
  return out;
}

}  // namespace denise
