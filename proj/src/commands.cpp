#include "adsvd/commands.hpp"

#include "adsvd/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace adsvd::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string numbered(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06d.png", prefix, index);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  if (!dir.empty()) {
    fs::create_directories(dir);
  }
}

Matrix as_columns(const std::vector<io::Image>& frames) {
  const auto d = static_cast<Index>(frames.front().size());
  Matrix a(d, static_cast<Index>(frames.size()));
  for (std::size_t j = 0; j < frames.size(); ++j) {
    if (static_cast<Index>(frames[j].size()) != d) {
      throw std::runtime_error("initialization frames differ in size");
    }
    a.col(static_cast<Index>(j)) =
        Eigen::Map<const Vector>(frames[j].pixels.data(), d);
  }
  return a;
}

std::vector<io::Image> load_init(const RunConfig& cfg,
                                 const std::vector<fs::path>& stream_files) {
  const std::vector<fs::path> files =
      cfg.init_dir.empty() ? stream_files : io::list_frames(cfg.init_dir);
  if (files.empty()) {
    throw std::runtime_error("no initialization frames found");
  }
  const int n = static_cast<int>(files.size());
  const int span = cfg.init_span > cfg.init_count ? std::min(cfg.init_span, n)
                                                  : std::min(cfg.init_count, n);
  std::vector<io::Image> out;
  for (int idx : equidistant(std::min(cfg.init_count, span), span)) {
    out.push_back(io::downsample(io::read_image(files[static_cast<std::size_t>(idx)]),
                                 cfg.downsample));
  }
  return out;
}

io::Image denormalize(const Vector& background, double mu, double sd, int w, int h) {
  io::Image img{w, h, {}};
  img.pixels.resize(static_cast<std::size_t>(background.size()));
  for (Index i = 0; i < background.size(); ++i) {
    img.pixels[static_cast<std::size_t>(i)] = background(i) * sd + mu;
  }
  return img;
}

void require_valid(const RunConfig& cfg) {
  if (cfg.init_count < 1) {
    throw std::invalid_argument("init-count must be >= 1");
  }
  if (cfg.downsample < 1) {
    throw std::invalid_argument("downsample must be >= 1");
  }
  if (cfg.morph_radius < 0 || cfg.min_blob < 0) {
    throw std::invalid_argument("morph-radius and min-blob must be >= 0");
  }
  cfg.params.validate();
}

}  // namespace

std::vector<int> equidistant(int count, int span) {
  if (count < 1 || span < 1) {
    throw std::invalid_argument("equidistant: count and span must be >= 1");
  }
  if (count >= span) {
    std::vector<int> all(static_cast<std::size_t>(span));
    for (int i = 0; i < span; ++i) {
      all[static_cast<std::size_t>(i)] = i;
    }
    return all;
  }
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(count == 1 ? 0
                             : static_cast<int>(std::lround(
                                   static_cast<double>(k) * (span - 1) / (count - 1))));
  }
  return out;
}

RunSummary cmd_run(const RunConfig& cfg, std::ostream& log) {
  require_valid(cfg);
  if (cfg.input.empty() || !fs::is_directory(cfg.input)) {
    throw std::runtime_error("input directory not found: " + cfg.input.string());
  }
  std::vector<fs::path> files = io::list_frames(cfg.input);
  if (files.empty()) {
    throw std::runtime_error("no frames in " + cfg.input.string());
  }
  if (cfg.max_frames > 0 && files.size() > static_cast<std::size_t>(cfg.max_frames)) {
    files.resize(static_cast<std::size_t>(cfg.max_frames));
  }

  const std::vector<io::Image> init = load_init(cfg, files);
  const int w = init.front().width;
  const int h = init.front().height;
  bg::BackgroundModel model(cfg.params, as_columns(init), w, h);

  RunSummary summary;
  summary.width = w;
  summary.height = h;
  if (init.size() < static_cast<std::size_t>(cfg.init_count)) {
    summary.warnings.push_back("only " + std::to_string(init.size()) +
                               " initialization frames available");
  }
  if (!model.warning().empty()) {
    summary.warnings.push_back(model.warning());
  }
  for (const auto& msg : summary.warnings) {
    log << "warning: " << msg << '\n';
  }

  ensure_dir(cfg.out_masks);
  ensure_dir(cfg.out_foreground);
  ensure_dir(cfg.out_background);

  io::FrameSource src(files, {.stride = 1, .downsample = cfg.downsample});
  int t = 0;
  while (auto img = src.next()) {
    ++t;
    const auto t0 = Clock::now();
    const bg::StepResult r = model.step(img->pixels);
    const Mask mask = post::postprocess(r.mask, cfg.morph_radius, cfg.min_blob);
    summary.seconds += seconds_since(t0);

    if (!cfg.out_masks.empty()) {
      io::write_mask(cfg.out_masks / numbered("bin", t), mask);
    }
    if (!cfg.out_foreground.empty()) {
      io::write_image(cfg.out_foreground / numbered("fg", t), {w, h, r.foreground});
    }
    if (!cfg.out_background.empty()) {
      io::write_image(cfg.out_background / numbered("bg", t),
                      denormalize(r.background, r.mu, r.sd, w, h));
    }
  }

  summary.stats = model.stats();
  summary.pending = model.pending();
  summary.fps = summary.seconds > 0.0 ? static_cast<double>(t) / summary.seconds : 0.0;
  if (!cfg.out_summary.empty()) {
    ensure_dir(cfg.out_summary.parent_path());
    std::ofstream os(cfg.out_summary);
    if (!os) {
      throw std::runtime_error("cannot write " + cfg.out_summary.string());
    }
    write_summary(os, summary);
  }
  return summary;
}

void write_summary(std::ostream& os, const RunSummary& s) {
  const auto& st = s.stats;
  os << "frames: " << st.frames << '\n'
     << "size: " << s.width << 'x' << s.height << '\n'
     << "offered: " << st.offered << '\n'
     << "accepted: " << st.accepted << '\n'
     << "rejected_tau: " << st.rejected_tau << '\n'
     << "rejected_similarity: " << st.rejected_similarity << '\n'
     << "degenerate: " << st.degenerate << '\n'
     << "pending: " << s.pending << '\n'
     << "blocks: " << st.blocks << '\n'
     << "forced_blocks: " << st.forced_blocks << '\n'
     << "reinits: " << st.reinits << '\n';
  const auto flags = os.flags();
  os << std::fixed << std::setprecision(6) << "append_seconds: " << st.append_seconds
     << '\n'
     << "reinit_seconds: " << st.reinit_seconds << '\n'
     << "seconds: " << s.seconds << '\n'
     << std::setprecision(2) << "fps: " << s.fps << '\n';
  os.flags(flags);
  for (const auto& w : s.warnings) {
    os << "warning: " << w << '\n';
  }
}

EvalResult cmd_eval(const EvalConfig& cfg, std::ostream& log) {
  require_valid(cfg.run);
  const io::CdnetSequence seq = io::CdnetSequence::open(cfg.run.input);
  if (seq.input_count < 1) {
    throw std::runtime_error("no input frames in " + cfg.run.input.string());
  }
  const int last = std::min(seq.roi_end, seq.input_count);
  if (seq.roi_end > seq.input_count) {
    log << "warning: temporal ROI ends at " << seq.roi_end << " but only "
        << seq.input_count << " input frames exist\n";
  }

  EvalResult res;
  auto score = [&](int t, const Mask& mask) {
    const fs::path gt_path = seq.groundtruth_frame(t);
    if (!fs::exists(gt_path)) {
      res.missing_groundtruth.push_back(t);
      return;
    }
    const io::LabelImage gt = io::read_labels(gt_path);
    if (gt.width != mask.width || gt.height != mask.height) {
      throw std::runtime_error("ground truth size differs from mask: " +
                               gt_path.string());
    }
    post::accumulate_confusion(mask, gt.labels, res.counts);
    ++res.evaluated;
  };

  if (!cfg.masks.empty()) {
    for (int t = seq.roi_start; t <= last; ++t) {
      const fs::path p = cfg.masks / numbered("bin", t);
      const io::LabelImage l = io::read_labels(p);
      Mask m(l.width, l.height);
      for (std::size_t i = 0; i < l.labels.size(); ++i) {
        m.bits[i] = l.labels[i] >= 128 ? 1 : 0;
      }
      score(t, m);
    }
  } else {
    const RunConfig& run = cfg.run;
    const int pre = seq.roi_start - 1;
    const int span = std::min(seq.input_count, std::max(pre, run.init_count));
    if (pre < run.init_count) {
      log << "warning: pre-ROI segment has " << pre << " frames; initializing from the first "
          << span << '\n';
    }
    std::vector<io::Image> init;
    for (int idx : equidistant(std::min(run.init_count, span), span)) {
      init.push_back(io::downsample(io::read_image(seq.input_frame(idx + 1)), run.downsample));
    }
    const int w = init.front().width;
    const int h = init.front().height;
    bg::BackgroundModel model(run.params, as_columns(init), w, h);
    if (!model.warning().empty()) {
      log << "warning: " << model.warning() << '\n';
    }
    ensure_dir(run.out_masks);
    double seconds = 0.0;
    for (int t = 1; t <= last; ++t) {
      const fs::path p = seq.input_frame(t);
      const io::Image img = io::downsample(io::read_image(p), run.downsample);
      if (img.width != w || img.height != h) {
        throw std::runtime_error("frame size changed in " + p.string());
      }
      const auto t0 = Clock::now();
      const bg::StepResult r = model.step(img.pixels);
      const Mask mask = post::postprocess(r.mask, run.morph_radius, run.min_blob);
      seconds += seconds_since(t0);
      if (!run.out_masks.empty()) {
        io::write_mask(run.out_masks / numbered("bin", t), mask);
      }
      if (t >= seq.roi_start) {
        score(t, mask);
      }
    }
    res.fps = seconds > 0.0 ? last / seconds : 0.0;
  }

  if (!res.missing_groundtruth.empty()) {
    log << "warning: " << res.missing_groundtruth.size()
        << " frames without ground truth were excluded:";
    for (int t : res.missing_groundtruth) {
      log << ' ' << t;
    }
    log << '\n';
  }
  res.metrics = post::metrics(res.counts);
  if (!cfg.out_metrics.empty()) {
    ensure_dir(cfg.out_metrics.parent_path());
    std::ofstream os(cfg.out_metrics);
    if (!os) {
      throw std::runtime_error("cannot write " + cfg.out_metrics.string());
    }
    post::write_metrics(os, res.metrics, res.counts);
    os << "frames: " << res.evaluated << '\n';
    if (res.fps > 0.0) {
      os << "fps: " << std::fixed << std::setprecision(2) << res.fps << '\n';
    }
  }
  return res;
}

std::vector<TimingRow> cmd_timing(const TimingConfig& cfg, std::ostream& log) {
  require_valid(cfg.run);
  if (cfg.divisors.empty() || cfg.frames < 1) {
    throw std::invalid_argument("timing needs at least one size and one frame");
  }
  const bool synthetic = cfg.synthetic_width > 0 && cfg.synthetic_height > 0;
  std::vector<io::Image> source;
  if (!synthetic) {
    if (cfg.run.input.empty()) {
      throw std::invalid_argument("timing needs --input or --synthetic");
    }
    const auto files = io::list_frames(cfg.run.input);
    if (files.empty()) {
      throw std::runtime_error("no frames in " + cfg.run.input.string());
    }
    const std::size_t need = static_cast<std::size_t>(cfg.run.init_count + cfg.frames);
    for (std::size_t k = 0; k < std::min(need, files.size()); ++k) {
      source.push_back(io::downsample(io::read_image(files[k]), cfg.run.downsample));
    }
    if (source.size() < need) {
      log << "warning: " << source.size() << " input frames, cycling to " << need << '\n';
    }
  }
  const int base_w = synthetic ? cfg.synthetic_width : source.front().width;
  const int base_h = synthetic ? cfg.synthetic_height : source.front().height;

  bg::Params params = cfg.run.params;
  params.similarity_check = false;
  params.period = 1;

  std::vector<TimingRow> rows;
  for (int div : cfg.divisors) {
    if (div < 1) {
      throw std::invalid_argument("size divisors must be >= 1");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(div));
    const int w = std::max(1, static_cast<int>(std::lround(base_w * scale)));
    const int h = std::max(1, static_cast<int>(std::lround(base_h * scale)));

    synth::Scene scene({w, h, 1, 2.0});
    if (synthetic) {
      synth::Square sq;
      sq.size = std::max(2, static_cast<int>(std::lround(20 * scale)));
      sq.vx = 3.0 * scale;
      sq.vy = 2.0 * scale;
      scene.add(sq);
    }
    auto frame = [&](int k) {
      if (synthetic) {
        return scene.render(k);
      }
      return io::resize(source[static_cast<std::size_t>(k) % source.size()], w, h);
    };

    std::vector<io::Image> init;
    for (int k = 0; k < cfg.run.init_count; ++k) {
      init.push_back(frame(k));
    }
    bg::BackgroundModel model(params, as_columns(init), w, h);
    for (int k = 0; k < cfg.frames; ++k) {
      model.step(frame(cfg.run.init_count + k).pixels);
    }
    TimingRow row;
    row.divisor = div;
    row.width = w;
    row.height = h;
    row.append_seconds = model.stats().append_seconds;
    row.reinit_seconds = model.stats().reinit_seconds;
    row.accepted = model.stats().accepted;
    row.reinits = model.stats().reinits;
    rows.push_back(row);
    log << "timed " << w << 'x' << h << '\n';
  }

  const auto ref = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.divisor < b.divisor;
  });
  for (auto& row : rows) {
    const double s = static_cast<double>(ref->divisor) / row.divisor;
    row.append_factor =
        ref->append_seconds > 0.0 ? row.append_seconds / (ref->append_seconds * s) : 0.0;
    row.reinit_factor =
        ref->reinit_seconds > 0.0 ? row.reinit_seconds / (ref->reinit_seconds * s) : 0.0;
  }

  if (!cfg.out_timing.empty()) {
    ensure_dir(cfg.out_timing.parent_path());
    std::ofstream os(cfg.out_timing);
    if (!os) {
      throw std::runtime_error("cannot write " + cfg.out_timing.string());
    }
    write_timing(os, rows);
  }
  return rows;
}

void write_timing(std::ostream& os, const std::vector<TimingRow>& rows) {
  const auto flags = os.flags();
  os << "# pixels divisor width height append_s append_factor reinit_s reinit_factor "
        "accepted reinits\n";
  for (const auto& r : rows) {
    os << static_cast<long long>(r.width) * r.height << ' ' << r.divisor << ' ' << r.width
       << ' ' << r.height << ' ' << std::fixed << std::setprecision(6) << r.append_seconds
       << ' ' << std::setprecision(3) << r.append_factor << ' ' << std::setprecision(6)
       << r.reinit_seconds << ' ' << std::setprecision(3) << r.reinit_factor << ' '
       << r.accepted << ' ' << r.reinits << '\n';
    os.flags(flags);
  }
}

}  // namespace adsvd::cli
