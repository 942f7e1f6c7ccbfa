#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "roc_pose/error.hpp"

namespace roc_pose {

// Dense row-major image. Pixel (u, v) is column u, row v.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0)
      throw Error(ErrorKind::kInvalidArgument, "negative image size");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }

  T &operator()(int u, int v) {
    return data_[static_cast<std::size_t>(v) * width_ + u];
  }
  const T &operator()(int u, int v) const {
    return data_[static_cast<std::size_t>(v) * width_ + u];
  }

  std::vector<T> &data() noexcept { return data_; }
  const std::vector<T> &data() const noexcept { return data_; }

  template <typename U>
  bool same_size(const Image<U> &other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image &, const Image &) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Depth in meters along the optical axis; 0 marks a missing measurement.
using DepthImage = Image<float>;
// Binary object mask, values in {0, 1}.
using MaskImage = Image<std::uint8_t>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb &, const Rgb &) = default;
};
using RgbImage = Image<Rgb>;

template <typename A, typename B>
void require_same_size(const Image<A> &a, const Image<B> &b,
                       const std::string &what) {
  if (!a.same_size(b))
    throw Error(ErrorKind::kDimensionMismatch,
                what + ": " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
}

inline std::size_t count_nonzero(const MaskImage &mask) {
  std::size_t n = 0;
  for (auto m : mask.data()) n += m != 0;
  return n;
}

}  // namespace roc_pose
