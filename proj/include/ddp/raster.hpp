#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ddp {

/// Dense 2-D raster with interleaved channels, row-major, index
/// (y * width + x) * channels + c.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, int channels = 1, T fill = T())
      : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0 || channels <= 0) {
      throw std::invalid_argument("Grid: non-positive dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::vector<T>& raw() noexcept { return data_; }
  const std::vector<T>& raw() const noexcept { return data_; }

  T& operator()(int x, int y, int c = 0) {
    return data_[index(x, y, c)];
  }
  const T& operator()(int x, int y, int c = 0) const {
    return data_[index(x, y, c)];
  }

  std::size_t index(int x, int y, int c = 0) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height() &&
           channels_ == other.channels();
  }
  template <typename U>
  bool same_extent(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  void fill(T value) { data_.assign(data_.size(), value); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ &&
           a.channels_ == b.channels_ && a.data_ == b.data_;
  }

 private:
  int width_ = 0, height_ = 0, channels_ = 1;
  std::vector<T> data_;
};

using GridD = Grid<double>;
using GridF = Grid<float>;

/// Per-pixel validity raster, 1 = valid. Always single channel.
using Mask = Grid<std::uint8_t>;

/// 3-channel color raster with intensities in [0, 1].
using RgbImage = Grid<double>;

inline std::size_t count_true(const Mask& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) n += m.data()[i] ? 1 : 0;
  return n;
}

}  // namespace ddp
