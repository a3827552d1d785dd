#include "adsvd/postprocess.hpp"

#include <opencv2/imgproc.hpp>

#include <array>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace adsvd::post {

namespace {

cv::Mat disk(int radius) {
  cv::Mat k(2 * radius + 1, 2 * radius + 1, CV_8U, cv::Scalar(0));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) {
        k.at<std::uint8_t>(dy + radius, dx + radius) = 1;
      }
    }
  }
  return k;
}

// Non-owning view of the mask bytes.
cv::Mat view(Mask& m) {
  return cv::Mat(m.height, m.width, CV_8U, m.bits.data());
}

}  // namespace

Mask morph_close(const Mask& mask, int radius) {
  if (radius < 0) {
    throw std::invalid_argument("morph_close: negative radius");
  }
  if (radius == 0 || mask.size() == 0) {
    return mask;
  }
  Mask out = mask;
  cv::Mat m = view(out);
  const cv::Mat k = disk(radius);
  // The default border value makes out-of-frame pixels neutral for both
  // dilation and erosion.
  cv::dilate(m, m, k);
  cv::erode(m, m, k);
  return out;
}

Mask remove_small_blobs(const Mask& mask, int min_area) {
  if (min_area < 0) {
    throw std::invalid_argument("remove_small_blobs: negative area");
  }
  if (min_area <= 1 || mask.size() == 0) {
    return mask;
  }
  Mask copy = mask;
  cv::Mat labels;
  cv::Mat stats;
  cv::Mat centroids;
  cv::connectedComponentsWithStats(view(copy), labels, stats, centroids, 8,
                                   CV_32S);
  Mask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    const int* row = labels.ptr<int>(y);
    for (int x = 0; x < mask.width; ++x) {
      const int id = row[x];
      if (id > 0 && stats.at<int>(id, cv::CC_STAT_AREA) >= min_area) {
        out.set(x, y, true);
      }
    }
  }
  return out;
}

Mask postprocess(const Mask& mask, int radius, int min_area) {
  return remove_small_blobs(morph_close(mask, radius), min_area);
}

Label classify_label(std::uint8_t value) {
  static constexpr std::array<std::pair<int, Label>, 5> kCodes{{
      {0, Label::kBackground},
      {50, Label::kBackground},
      {85, Label::kExcluded},
      {170, Label::kExcluded},
      {255, Label::kForeground},
  }};
  Label best = Label::kBackground;
  int best_dist = 256;
  for (const auto& [code, label] : kCodes) {
    const int dist = std::abs(static_cast<int>(value) - code);
    if (dist < best_dist) {
      best_dist = dist;
      best = label;
    }
  }
  return best;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  excluded += o.excluded;
  return *this;
}

void accumulate_confusion(const Mask& pred, std::span<const std::uint8_t> gt,
                          ConfusionCounts& acc) {
  if (gt.size() != pred.size()) {
    throw std::invalid_argument("accumulate_confusion: size mismatch");
  }
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool p = pred.bits[i] != 0;
    switch (classify_label(gt[i])) {
      case Label::kExcluded:
        ++acc.excluded;
        break;
      case Label::kForeground:
        ++(p ? acc.tp : acc.fn);
        break;
      case Label::kBackground:
        ++(p ? acc.fp : acc.tn);
        break;
    }
  }
}

ConfusionCounts confusion(const Mask& pred, std::span<const std::uint8_t> gt) {
  ConfusionCounts c;
  accumulate_confusion(pred, gt, c);
  return c;
}

MetricsReport metrics(const ConfusionCounts& c) {
  MetricsReport m;
  const auto ratio = [&](double num, double den, const char* name) {
    if (den == 0.0) {
      m.undefined.emplace_back(name);
      return 0.0;
    }
    return num / den;
  };
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  const double tn = static_cast<double>(c.tn);
  const double fn = static_cast<double>(c.fn);

  m.recall = ratio(tp, tp + fn, "recall");
  m.specificity = ratio(tn, tn + fp, "specificity");
  m.fpr = ratio(fp, fp + tn, "fpr");
  m.fnr = ratio(fn, tp + fn, "fnr");
  m.pbc = 100.0 * ratio(fn + fp, tp + fn + fp + tn, "pbc");
  m.precision = ratio(tp, tp + fp, "precision");
  m.f_measure = ratio(2.0 * m.precision * m.recall, m.precision + m.recall,
                      "f_measure");
  return m;
}

void write_metrics(std::ostream& os, const MetricsReport& m,
                   const ConfusionCounts& c) {
  const auto flags = os.flags();
  os << std::setprecision(6) << std::fixed;
  os << "recall: " << m.recall << '\n'
     << "specificity: " << m.specificity << '\n'
     << "fpr: " << m.fpr << '\n'
     << "fnr: " << m.fnr << '\n'
     << "pbc: " << m.pbc << '\n'
     << "precision: " << m.precision << '\n'
     << "f_measure: " << m.f_measure << '\n';
  os.flags(flags);
  os << "tp: " << c.tp << '\n'
     << "fp: " << c.fp << '\n'
     << "tn: " << c.tn << '\n'
     << "fn: " << c.fn << '\n'
     << "excluded: " << c.excluded << '\n';
  if (!m.undefined.empty()) {
    os << "undefined:";
    for (const auto& name : m.undefined) {
      os << ' ' << name;
    }
    os << '\n';
  }
}

}  // namespace adsvd::post
