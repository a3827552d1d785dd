#include "adsvd/synth.hpp"

#include <cmath>
#include <stdexcept>

namespace adsvd::synth {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1) from a hashed key.
double signed_unit(std::uint64_t key) {
  return static_cast<double>(splitmix(key) >> 11) * 0x1.0p-52 - 1.0;
}

// Folds an unbounded coordinate into [0, span] like a bouncing ball.
double bounce(double p, double span) {
  if (span <= 0.0) {
    return 0.0;
  }
  const double period = 2.0 * span;
  double m = std::fmod(p, period);
  if (m < 0.0) {
    m += period;
  }
  return m <= span ? m : period - m;
}

}  // namespace

void square_position(const Square& sq, int t, int width, int height, int& x,
                     int& y) {
  const double dt = static_cast<double>(t - sq.first_frame);
  x = static_cast<int>(std::lround(bounce(sq.x0 + sq.vx * dt, width - sq.size)));
  y = static_cast<int>(std::lround(bounce(sq.y0 + sq.vy * dt, height - sq.size)));
}

Scene::Scene(SceneSpec spec) : spec_(spec) {
  if (spec_.width < 2 || spec_.height < 2) {
    throw std::invalid_argument("synthetic scene: too small");
  }
  background_.width = spec_.width;
  background_.height = spec_.height;
  background_.pixels.resize(static_cast<std::size_t>(spec_.width) * spec_.height);
  const double phase = signed_unit(spec_.seed) * 3.0;
  double sum = 0.0;
  for (int y = 0; y < spec_.height; ++y) {
    for (int x = 0; x < spec_.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * spec_.width + x;
      const double smooth = 30.0 * std::sin(x / 9.0 + phase) * std::cos(y / 13.0) +
                            15.0 * std::sin((x + 2.0 * y) / 23.0);
      const double grain = 12.0 * signed_unit(spec_.seed * 0x100000001b3ULL + i);
      background_.pixels[i] = 100.0 + smooth + grain;
      sum += background_.pixels[i];
    }
  }
  const double mean = sum / static_cast<double>(background_.size());
  double sq = 0.0;
  for (double v : background_.pixels) {
    sq += (v - mean) * (v - mean);
  }
  background_sd_ = std::sqrt(sq / static_cast<double>(background_.size() - 1));
}

io::Image Scene::render(int t, Mask* truth) const {
  io::Image img = background_;
  if (truth != nullptr) {
    *truth = Mask(spec_.width, spec_.height);
  }
  for (const Square& s : squares_) {
    if (t < s.first_frame || t > s.last_frame) {
      continue;
    }
    int x0 = 0;
    int y0 = 0;
    square_position(s, t, spec_.width, spec_.height, x0, y0);
    const double offset = s.contrast_sd * background_sd_;
    for (int y = y0; y < std::min(y0 + s.size, spec_.height); ++y) {
      for (int x = x0; x < std::min(x0 + s.size, spec_.width); ++x) {
        img.pixels[static_cast<std::size_t>(y) * spec_.width + x] =
            background_.pixels[static_cast<std::size_t>(y) * spec_.width + x] + offset;
        if (truth != nullptr) {
          truth->set(x, y, true);
        }
      }
    }
  }
  if (spec_.noise_amplitude > 0.0) {
    const std::uint64_t frame_key = splitmix(spec_.seed ^ (0xabcdefULL + static_cast<std::uint64_t>(t)));
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      img.pixels[i] += spec_.noise_amplitude * signed_unit(frame_key + i);
    }
  }
  return img;
}

}  // namespace adsvd::synth
