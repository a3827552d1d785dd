#pragma once

// The three pipeline commands behind the command-line tool: streaming
// subtraction over a frame directory, evaluation against CDnet ground truth
// and append/re-init timing across image sizes.

#include "adsvd/bgmodel.hpp"
#include "adsvd/postprocess.hpp"
#include "adsvd/video_io.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace adsvd::cli {

namespace fs = std::filesystem;

struct RunConfig {
  fs::path input;
  fs::path init_dir;  // explicit initialization frames; empty uses `input`
  int init_count = 15;
  /// When > init_count, the init frames are spread equidistantly over the
  /// first init_span frames instead of taking the first init_count.
  int init_span = 0;
  int max_frames = 0;  // 0 processes the whole sequence
  bg::Params params;
  int downsample = 1;
  int morph_radius = 2;
  int min_blob = 15;
  fs::path out_masks;
  fs::path out_foreground;
  fs::path out_background;
  fs::path out_summary;
};

struct RunSummary {
  bg::Stats stats;
  std::int64_t pending = 0;
  int width = 0;
  int height = 0;
  double seconds = 0.0;  // model and postprocessing, excluding file I/O
  double fps = 0.0;
  std::vector<std::string> warnings;
};

/// `count` indices spread evenly over [0, span), first and last included.
std::vector<int> equidistant(int count, int span);

/// Frames are read from `input`, masked, postprocessed and written as
/// bin%06d.png (1-based). Throws std::runtime_error on bad input.
RunSummary cmd_run(const RunConfig& cfg, std::ostream& log);
void write_summary(std::ostream& os, const RunSummary& s);

struct EvalConfig {
  RunConfig run;  // run.input is the CDnet sequence root
  fs::path masks;  // evaluate these bin%06d.png files instead of running
  fs::path out_metrics;
};

struct EvalResult {
  post::ConfusionCounts counts;
  post::MetricsReport metrics;
  int evaluated = 0;
  std::vector<int> missing_groundtruth;
  double fps = 0.0;
};

/// Initializes from init_count frames spread over the pre-ROI segment,
/// streams the sequence and scores frames roi_start..roi_end.
EvalResult cmd_eval(const EvalConfig& cfg, std::ostream& log);

struct TimingConfig {
  RunConfig run;  // frames from run.input unless synthetic sizes are set
  std::vector<int> divisors{1, 2, 4, 8, 16};
  int frames = 900;
  int synthetic_width = 0;
  int synthetic_height = 0;
  fs::path out_timing;
};

struct TimingRow {
  int divisor = 1;
  int width = 0;
  int height = 0;
  double append_seconds = 0.0;
  double reinit_seconds = 0.0;
  double append_factor = 0.0;
  double reinit_factor = 0.0;
  std::int64_t accepted = 0;
  std::int64_t reinits = 0;
};

/// Every block is appended with the similarity gate off and a forced update
/// per block, so each size sees the same work per frame. Factors follow
/// t_{d/i} / (t_{d/s} * s / i) with s the largest divisor.
std::vector<TimingRow> cmd_timing(const TimingConfig& cfg, std::ostream& log);
void write_timing(std::ostream& os, const std::vector<TimingRow>& rows);

}  // namespace adsvd::cli
