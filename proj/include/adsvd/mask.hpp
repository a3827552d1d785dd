#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace adsvd {

/// Binary foreground map, row-major, one byte per pixel (0 or 1).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t size() const { return bits.size(); }
  bool at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) {
      n += b != 0;
    }
    return n;
  }

  friend bool operator==(const Mask&, const Mask&) = default;
};

}  // namespace adsvd
