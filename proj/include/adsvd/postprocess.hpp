#pragma once

// Mask clean-up and change-detection metrics.

#include "adsvd/mask.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace adsvd::post {

/// Dilation followed by erosion with the discrete disk x^2 + y^2 <= r^2.
/// Pixels outside the frame never contribute to either pass.
Mask morph_close(const Mask& mask, int radius);

/// Clears 8-connected components with fewer than `min_area` pixels.
Mask remove_small_blobs(const Mask& mask, int min_area);

/// morph_close then remove_small_blobs; zero values skip a stage.
Mask postprocess(const Mask& mask, int radius, int min_area);

/// Ground-truth label classes in the CDnet encoding.
enum class Label { kBackground, kForeground, kExcluded };

/// 0 static and 50 shadow are background, 255 motion is foreground, 85
/// outside-ROI and 170 unknown are excluded. Other values snap to the
/// nearest code.
Label classify_label(std::uint8_t value);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;
  std::uint64_t excluded = 0;

  std::uint64_t total() const { return tp + fp + tn + fn + excluded; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Adds one frame's counts to `acc`. `gt` holds one label per pixel.
void accumulate_confusion(const Mask& pred, std::span<const std::uint8_t> gt,
                          ConfusionCounts& acc);
ConfusionCounts confusion(const Mask& pred, std::span<const std::uint8_t> gt);

struct MetricsReport {
  double recall = 0.0;
  double specificity = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double pbc = 0.0;  // percent
  double precision = 0.0;
  double f_measure = 0.0;
  /// Metrics whose denominator was zero; they are reported as 0.
  std::vector<std::string> undefined;
};

MetricsReport metrics(const ConfusionCounts& c);

/// One `key: value` line per metric followed by the raw counts.
void write_metrics(std::ostream& os, const MetricsReport& m,
                   const ConfusionCounts& c);

}  // namespace adsvd::post
