#pragma once

// Deterministic synthetic scenes with exact ground truth: a static textured
// background, per-frame sensor noise and square objects.

#include "adsvd/mask.hpp"
#include "adsvd/video_io.hpp"

#include <cstdint>
#include <vector>

namespace adsvd::synth {

struct Square {
  int size = 20;
  double contrast_sd = 3.0;  // offset in units of the background std
  double x0 = 0.0;           // top-left corner at first_frame
  double y0 = 0.0;
  double vx = 0.0;  // pixels per frame; bounces off the frame border
  double vy = 0.0;
  int first_frame = 0;
  int last_frame = 1 << 30;  // inclusive
};

struct SceneSpec {
  int width = 320;
  int height = 240;
  std::uint64_t seed = 1;
  double noise_amplitude = 2.0;  // uniform sensor noise in [-a, a]
};

class Scene {
 public:
  explicit Scene(SceneSpec spec);

  void add(const Square& sq) { squares_.push_back(sq); }

  /// Frame t; the exact foreground is written to `truth` when given.
  io::Image render(int t, Mask* truth = nullptr) const;

  const io::Image& background() const { return background_; }
  double background_sd() const { return background_sd_; }
  int width() const { return spec_.width; }
  int height() const { return spec_.height; }

 private:
  SceneSpec spec_;
  io::Image background_;
  double background_sd_ = 0.0;
  std::vector<Square> squares_;
};

/// Position of a bouncing square's top-left corner at time t.
void square_position(const Square& sq, int t, int width, int height, int& x,
                     int& y);

}  // namespace adsvd::synth
