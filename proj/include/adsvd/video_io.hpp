#pragma once

// Frame ingestion: decoding, grayscale conversion, box downsampling and the
// CDnet directory layout.

#include "adsvd/mask.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace adsvd::io {

namespace fs = std::filesystem;

/// Grayscale image with double intensities in the source range (0..255 for
/// 8-bit input), row-major.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  std::size_t size() const { return pixels.size(); }
};

/// ITU-R BT.601 luma.
double to_grayscale(double r, double g, double b);

/// Mean over `window` x `window` blocks. Frames whose size is not a multiple
/// of the window are padded by edge replication.
Image downsample(const Image& img, int window);

/// Area-averaging resample to an arbitrary size.
Image resize(const Image& img, int width, int height);

/// Decodes PGM/PNG/JPEG (anything OpenCV reads) to grayscale.
Image read_image(const fs::path& path);

/// Raw 8-bit single-channel labels, e.g. ground truth.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;
};
LabelImage read_labels(const fs::path& path);

/// Writes {0, 255} 8-bit PNG or PGM depending on the extension.
void write_mask(const fs::path& path, const Mask& mask);

/// Writes intensities rounded and clamped to 0..255.
void write_image(const fs::path& path, const Image& img);

/// Image files of a directory in lexicographic order.
std::vector<fs::path> list_frames(const fs::path& dir);

struct SourceOptions {
  int stride = 1;
  int downsample = 1;
};

/// Sequential reader over an ordered file list.
class FrameSource {
 public:
  FrameSource(std::vector<fs::path> files, SourceOptions opts);
  static FrameSource from_directory(const fs::path& dir, SourceOptions opts);

  /// Next frame, or nullopt at the end. Throws std::runtime_error naming the
  /// file when it cannot be decoded or its size differs from the first one.
  std::optional<Image> next();

  /// Number of frames the source will emit in total.
  std::size_t size() const;
  const fs::path& current_path() const { return current_; }

 private:
  std::vector<fs::path> files_;
  SourceOptions opts_;
  std::size_t pos_ = 0;
  int width_ = -1;
  int height_ = -1;
  fs::path current_;
};

std::vector<Image> read_sequence(const fs::path& dir, SourceOptions opts = {});

/// CDnet 2014 sequence: input/in%06d.{jpg,png}, groundtruth/gt%06d.png and
/// temporalROI.txt with the first and last evaluated frame (1-based).
struct CdnetSequence {
  fs::path root;
  int roi_start = 0;
  int roi_end = 0;
  int input_count = 0;

  static CdnetSequence open(const fs::path& root);

  fs::path input_frame(int index) const;
  fs::path groundtruth_frame(int index) const;
};

}  // namespace adsvd::io
