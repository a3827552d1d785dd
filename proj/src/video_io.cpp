#include "adsvd/video_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace adsvd::io {

namespace {

bool is_image_file(const fs::path& p) {
  static constexpr std::array<const char*, 9> kExt{
      ".png", ".pgm", ".ppm", ".pnm", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"};
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return std::find(kExt.begin(), kExt.end(), ext) != kExt.end();
}

std::string numbered(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%06d%s", prefix, index, ext);
  return buf;
}

}  // namespace

double to_grayscale(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

Image downsample(const Image& img, int window) {
  if (window < 1) {
    throw std::invalid_argument("downsample: window must be >= 1");
  }
  if (window == 1) {
    return img;
  }
  Image out;
  out.width = (img.width + window - 1) / window;
  out.height = (img.height + window - 1) / window;
  out.pixels.assign(static_cast<std::size_t>(out.width) * out.height, 0.0);
  const double inv = 1.0 / (static_cast<double>(window) * window);
  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      double sum = 0.0;
      for (int dy = 0; dy < window; ++dy) {
        const int y = std::min(oy * window + dy, img.height - 1);
        const double* row = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        for (int dx = 0; dx < window; ++dx) {
          sum += row[std::min(ox * window + dx, img.width - 1)];
        }
      }
      out.pixels[static_cast<std::size_t>(oy) * out.width + ox] = sum * inv;
    }
  }
  return out;
}

Image resize(const Image& img, int width, int height) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("resize: empty target size");
  }
  if (width == img.width && height == img.height) {
    return img;
  }
  const cv::Mat src(img.height, img.width, CV_64F,
                    const_cast<double*>(img.pixels.data()));
  cv::Mat dst;
  cv::resize(src, dst, cv::Size(width, height), 0, 0, cv::INTER_AREA);
  Image out;
  out.width = width;
  out.height = height;
  out.pixels.assign(dst.ptr<double>(0), dst.ptr<double>(0) + dst.total());
  return out;
}

Image read_image(const fs::path& path) {
  const cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  if (raw.empty()) {
    throw std::runtime_error("cannot decode image: " + path.string());
  }
  cv::Mat m;
  raw.convertTo(m, CV_MAKETYPE(CV_64F, raw.channels()));
  Image img;
  img.width = m.cols;
  img.height = m.rows;
  img.pixels.resize(static_cast<std::size_t>(m.cols) * m.rows);
  const int ch = m.channels();
  for (int y = 0; y < m.rows; ++y) {
    const double* row = m.ptr<double>(y);
    double* dst = img.pixels.data() + static_cast<std::size_t>(y) * m.cols;
    for (int x = 0; x < m.cols; ++x) {
      const double* px = row + static_cast<std::ptrdiff_t>(x) * ch;
      // OpenCV stores colour as BGR(A).
      dst[x] = ch >= 3 ? to_grayscale(px[2], px[1], px[0]) : px[0];
    }
  }
  return img;
}

LabelImage read_labels(const fs::path& path) {
  const cv::Mat m = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (m.empty()) {
    throw std::runtime_error("cannot decode label image: " + path.string());
  }
  LabelImage out;
  out.width = m.cols;
  out.height = m.rows;
  out.labels.resize(static_cast<std::size_t>(m.cols) * m.rows);
  for (int y = 0; y < m.rows; ++y) {
    std::copy_n(m.ptr<std::uint8_t>(y), m.cols,
                out.labels.data() + static_cast<std::size_t>(y) * m.cols);
  }
  return out;
}

void write_mask(const fs::path& path, const Mask& mask) {
  cv::Mat m(mask.height, mask.width, CV_8U);
  for (int y = 0; y < mask.height; ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width; ++x) {
      row[x] = mask.at(x, y) ? 255 : 0;
    }
  }
  if (!cv::imwrite(path.string(), m)) {
    throw std::runtime_error("cannot write mask: " + path.string());
  }
}

void write_image(const fs::path& path, const Image& img) {
  cv::Mat m(img.height, img.width, CV_8U);
  for (int y = 0; y < img.height; ++y) {
    auto* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < img.width; ++x) {
      const double v = img.pixels[static_cast<std::size_t>(y) * img.width + x];
      row[x] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  if (!cv::imwrite(path.string(), m)) {
    throw std::runtime_error("cannot write image: " + path.string());
  }
}

std::vector<fs::path> list_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

FrameSource::FrameSource(std::vector<fs::path> files, SourceOptions opts)
    : files_(std::move(files)), opts_(opts) {
  if (opts_.stride < 1) {
    throw std::invalid_argument("frame source: stride must be >= 1");
  }
  if (opts_.downsample < 1) {
    throw std::invalid_argument("frame source: downsample must be >= 1");
  }
}

FrameSource FrameSource::from_directory(const fs::path& dir,
                                        SourceOptions opts) {
  return FrameSource(list_frames(dir), opts);
}

std::size_t FrameSource::size() const {
  const auto stride = static_cast<std::size_t>(opts_.stride);
  return (files_.size() + stride - 1) / stride;
}

std::optional<Image> FrameSource::next() {
  if (pos_ >= files_.size()) {
    return std::nullopt;
  }
  current_ = files_[pos_];
  pos_ += static_cast<std::size_t>(opts_.stride);

  Image img = downsample(read_image(current_), opts_.downsample);
  if (width_ < 0) {
    width_ = img.width;
    height_ = img.height;
  } else if (img.width != width_ || img.height != height_) {
    throw std::runtime_error("frame size changed to " +
                             std::to_string(img.width) + "x" +
                             std::to_string(img.height) + " in " +
                             current_.string());
  }
  return img;
}

std::vector<Image> read_sequence(const fs::path& dir, SourceOptions opts) {
  FrameSource src = FrameSource::from_directory(dir, opts);
  std::vector<Image> out;
  out.reserve(src.size());
  while (auto img = src.next()) {
    out.push_back(std::move(*img));
  }
  return out;
}

CdnetSequence CdnetSequence::open(const fs::path& root) {
  CdnetSequence seq;
  seq.root = root;
  std::ifstream roi(root / "temporalROI.txt");
  if (!roi || !(roi >> seq.roi_start >> seq.roi_end)) {
    throw std::runtime_error("missing or malformed temporalROI.txt in " +
                             root.string());
  }
  if (seq.roi_start < 1 || seq.roi_end < seq.roi_start) {
    throw std::runtime_error("invalid temporal ROI in " + root.string());
  }
  seq.input_count = static_cast<int>(list_frames(root / "input").size());
  return seq;
}

fs::path CdnetSequence::input_frame(int index) const {
  for (const char* ext : {".jpg", ".png", ".pgm"}) {
    fs::path p = root / "input" / numbered("in", index, ext);
    if (fs::exists(p)) {
      return p;
    }
  }
  return root / "input" / numbered("in", index, ".jpg");
}

fs::path CdnetSequence::groundtruth_frame(int index) const {
  return root / "groundtruth" / numbered("gt", index, ".png");
}

}  // namespace adsvd::io
