#include "cnnscope/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cnnscope {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Bounds: return "bounds error";
    case ErrorKind::Model: return "model error";
    case ErrorKind::Corrupt: return "corrupt model";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Query: return "query error";
    case ErrorKind::Io: return "I/O error";
  }
  return "error";
}

std::string to_string(const Shape3& shape) {
  return std::to_string(shape.height) + "x" + std::to_string(shape.width) + "x" +
         std::to_string(shape.channels);
}

namespace {

void require_positive(const Shape3& shape) {
  if (shape.height < 1 || shape.width < 1 || shape.channels < 1) {
    throw Error(ErrorKind::Shape,
                "tensor dimensions must be >= 1, got " + to_string(shape));
  }
}

}  // namespace

Tensor3::Tensor3(Shape3 shape, float fill) : shape_(shape) {
  require_positive(shape);
  data_.assign(shape.size(), fill);
}

Tensor3::Tensor3(Shape3 shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  require_positive(shape);
  if (data_.size() != shape.size()) {
    throw Error(ErrorKind::Shape, "tensor " + to_string(shape) + " needs " +
                                      std::to_string(shape.size()) + " values, got " +
                                      std::to_string(data_.size()));
  }
}

void Tensor3::check_bounds(int h, int w, int c) const {
  if (h < 0 || h >= shape_.height || w < 0 || w >= shape_.width || c < 0 ||
      c >= shape_.channels) {
    throw Error(ErrorKind::Bounds, "index (" + std::to_string(h) + ", " + std::to_string(w) +
                                       ", " + std::to_string(c) + ") outside tensor " +
                                       to_string(shape_));
  }
}

float Tensor3::at(int h, int w, int c) const {
  check_bounds(h, w, c);
  return (*this)(h, w, c);
}

float& Tensor3::at(int h, int w, int c) {
  check_bounds(h, w, c);
  return (*this)(h, w, c);
}

Tensor3 Tensor3::channel_plane(int channel) const {
  if (channel < 0 || channel >= shape_.channels) {
    throw Error(ErrorKind::Bounds, "channel " + std::to_string(channel) + " outside tensor " +
                                       to_string(shape_));
  }
  Tensor3 plane(shape_.height, shape_.width, 1);
  for (int h = 0; h < shape_.height; ++h)
    for (int w = 0; w < shape_.width; ++w) plane(h, w, 0) = (*this)(h, w, channel);
  return plane;
}

Tensor3 tensor_new(int height, int width, int channels, float fill) {
  return Tensor3(height, width, channels, fill);
}

Window extract_window(const Tensor3& t, int channel, int row, int col, int size) {
  if (channel < 0 || channel >= t.channels()) {
    throw Error(ErrorKind::Bounds, "channel " + std::to_string(channel) + " outside tensor " +
                                       to_string(t.shape()));
  }
  if (size < 1) throw Error(ErrorKind::Bounds, "window size must be >= 1");
  if (row < 0 || row + size > t.height()) {
    throw Error(ErrorKind::Bounds, "window row " + std::to_string(row) + " + size " +
                                       std::to_string(size) + " exceeds height " +
                                       std::to_string(t.height()));
  }
  if (col < 0 || col + size > t.width()) {
    throw Error(ErrorKind::Bounds, "window col " + std::to_string(col) + " + size " +
                                       std::to_string(size) + " exceeds width " +
                                       std::to_string(t.width()));
  }
  return extract_window_padded(t, channel, row, col, size);
}

Window extract_window_padded(const Tensor3& t, int channel, int row, int col, int size) {
  if (channel < 0 || channel >= t.channels()) {
    throw Error(ErrorKind::Bounds, "channel " + std::to_string(channel) + " outside tensor " +
                                       to_string(t.shape()));
  }
  Window win{row, col, size, {}};
  win.values.reserve(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  for (int r = 0; r < size; ++r) {
    for (int q = 0; q < size; ++q) {
      const int h = row + r;
      const int w = col + q;
      const bool inside = h >= 0 && h < t.height() && w >= 0 && w < t.width();
      win.values.push_back(inside ? t(h, w, channel) : 0.0f);
    }
  }
  return win;
}

std::pair<float, float> plane_minmax(const Tensor3& t, int channel) {
  if (channel < 0 || channel >= t.channels()) {
    throw Error(ErrorKind::Bounds, "channel " + std::to_string(channel) + " outside tensor " +
                                       to_string(t.shape()));
  }
  float lo = t(0, 0, channel);
  float hi = lo;
  for (int h = 0; h < t.height(); ++h) {
    for (int w = 0; w < t.width(); ++w) {
      const float v = t(h, w, channel);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

float max_abs(const Tensor3& t) {
  float m = 0.0f;
  for (float v : t.data()) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace cnnscope
