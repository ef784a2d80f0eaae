#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cnnscope/error.hpp"

namespace cnnscope {

struct Shape3 {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
           static_cast<std::size_t>(channels);
  }
  friend bool operator==(const Shape3&, const Shape3&) = default;
};

std::string to_string(const Shape3& shape);

/// Dense height x width x channels volume of binary32 values.
///
/// Storage is row-major over (row, column, channel):
/// index(h, w, c) = (h * width + w) * channels + c. Flattening a tensor is
/// therefore a relabeling of its storage.
class Tensor3 {
 public:
  Tensor3() = default;

  /// Throws Error(Shape) if any dimension is < 1.
  Tensor3(Shape3 shape, float fill = 0.0f);
  Tensor3(int height, int width, int channels, float fill = 0.0f)
      : Tensor3(Shape3{height, width, channels}, fill) {}

  /// Adopts `data`; its length must equal shape.size().
  Tensor3(Shape3 shape, std::vector<float> data);

  const Shape3& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int h, int w, int c) const {
    return (static_cast<std::size_t>(h) * static_cast<std::size_t>(shape_.width) +
            static_cast<std::size_t>(w)) *
               static_cast<std::size_t>(shape_.channels) +
           static_cast<std::size_t>(c);
  }

  float operator()(int h, int w, int c) const { return data_[index(h, w, c)]; }
  float& operator()(int h, int w, int c) { return data_[index(h, w, c)]; }

  /// Bounds-checked access; throws Error(Bounds).
  float at(int h, int w, int c) const;
  float& at(int h, int w, int c);

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  /// Copy of one channel plane as a height x width x 1 tensor.
  Tensor3 channel_plane(int channel) const;

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  void check_bounds(int h, int w, int c) const;

  Shape3 shape_{};
  std::vector<float> data_;
};

Tensor3 tensor_new(int height, int width, int channels, float fill);

/// Square region copied out of one channel plane.
///
/// Windows produced by extract_window lie fully inside the plane. Windows
/// built for padded convolution traces may start at negative offsets; the
/// out-of-plane cells then hold zero.
struct Window {
  int origin_row = 0;
  int origin_col = 0;
  int size = 0;
  std::vector<float> values;  // size * size, row-major

  float operator()(int r, int q) const {
    return values[static_cast<std::size_t>(r) * static_cast<std::size_t>(size) +
                  static_cast<std::size_t>(q)];
  }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Throws Error(Bounds) naming the offending coordinate if the window leaves
/// the plane or the channel does not exist.
Window extract_window(const Tensor3& t, int channel, int row, int col, int size);

/// Like extract_window, but cells outside the plane read as zero.
Window extract_window_padded(const Tensor3& t, int channel, int row, int col, int size);

/// Exact min and max over one channel plane.
std::pair<float, float> plane_minmax(const Tensor3& t, int channel);

/// Largest |value| over the whole tensor (0 for an all-zero tensor).
float max_abs(const Tensor3& t);

}  // namespace cnnscope
