#include "cnnscope/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace cnnscope {

namespace detail {

Shape3 check_conv_args(const Tensor3& input, const LayerSpec& layer, const LayerParams& params) {
  if (layer.kind != LayerKind::Conv)
    throw Error(ErrorKind::Shape, "layer '" + layer.name + "' is not a conv layer");
  const Shape3 out_shape = output_shape(input.shape(), layer);
  const auto k = static_cast<std::size_t>(layer.conv.kernel_size);
  const auto want = static_cast<std::size_t>(layer.conv.out_channels) *
                    static_cast<std::size_t>(input.channels()) * k * k;
  if (params.weights.size() != want ||
      params.bias.size() != static_cast<std::size_t>(layer.conv.out_channels)) {
    throw Error(ErrorKind::Model, "layer '" + layer.name + "': missing or mis-sized weights (" +
                                      std::to_string(params.weights.size()) + " kernel values, " +
                                      std::to_string(want) + " expected)");
  }
  return out_shape;
}

Shape3 check_pool_args(const Tensor3& input, int pool_size, int stride) {
  if (pool_size < 1 || stride < 1)
    throw Error(ErrorKind::Shape, "pool size and stride must be >= 1");
  if (pool_size > input.height() || pool_size > input.width()) {
    throw Error(ErrorKind::Shape, "pool size " + std::to_string(pool_size) +
                                      " exceeds input plane " + to_string(input.shape()));
  }
  return {(input.height() - pool_size) / stride + 1, (input.width() - pool_size) / stride + 1,
          input.channels()};
}

void check_dense_args(const Tensor3& flat, const LayerSpec& layer, const LayerParams& params) {
  if (layer.kind != LayerKind::Dense)
    throw Error(ErrorKind::Shape, "layer '" + layer.name + "' is not a dense layer");
  if (flat.height() != 1 || flat.width() != 1)
    throw Error(ErrorKind::Shape, "dense input must be 1x1xN, got " + to_string(flat.shape()));
  const auto units = static_cast<std::size_t>(layer.dense.out_units);
  if (params.bias.size() != units || params.weights.size() % units != 0 ||
      params.weights.size() / units != flat.size()) {
    throw Error(ErrorKind::Shape, "layer '" + layer.name + "': input length " +
                                      std::to_string(flat.size()) +
                                      " does not match weight matrix (" +
                                      std::to_string(params.weights.size()) + " values for " +
                                      std::to_string(units) + " units)");
  }
}

}  // namespace detail

namespace {

// Threads only pay off above this many multiply-adds.
constexpr std::size_t kParallelThreshold = 1 << 14;

// Kernel taps [lo, hi) that land inside [0, extent) for output position `pos`.
struct TapRange {
  int lo;
  int hi;
};

TapRange valid_taps(int pos, int stride, int padding, int kernel, int extent) {
  const int start = pos * stride - padding;
  return {std::max(0, -start), std::min(kernel, extent - start)};
}

}  // namespace

Tensor3 conv_forward(const Tensor3& input, const LayerSpec& layer, const LayerParams& params) {
  const Shape3 out_shape = detail::check_conv_args(input, layer, params);
  const auto& hp = layer.conv;
  const int k = hp.kernel_size;
  const int in_c = input.channels();
  const int in_w = input.width();
  const float* src = input.data().data();
  const float* kernels = params.weights.data();
  Tensor3 out(out_shape);
  float* dst = out.data().data();
  const int oc = out_shape.channels;
  const int oh = out_shape.height;
  const int ow = out_shape.width;
  const std::size_t work = out_shape.size() * static_cast<std::size_t>(in_c * k * k);

#pragma omp parallel for collapse(2) schedule(static) if (work > kParallelThreshold)
  for (int o = 0; o < oc; ++o) {
    for (int h = 0; h < oh; ++h) {
      const TapRange rows = valid_taps(h, hp.stride, hp.padding, k, input.height());
      const int y0 = h * hp.stride - hp.padding;
      for (int w = 0; w < ow; ++w) {
        const TapRange cols = valid_taps(w, hp.stride, hp.padding, k, in_w);
        const int x0 = w * hp.stride - hp.padding;
        float acc = 0.0f;
        for (int i = 0; i < in_c; ++i) {
          const float* kern = kernels + (static_cast<std::size_t>(o) * in_c + i) * k * k;
          for (int r = rows.lo; r < rows.hi; ++r) {
            const float* row = src + (static_cast<std::size_t>(y0 + r) * in_w + x0) * in_c + i;
            const float* krow = kern + r * k;
            for (int q = cols.lo; q < cols.hi; ++q) acc += row[q * in_c] * krow[q];
          }
        }
        dst[(static_cast<std::size_t>(h) * ow + w) * oc + o] =
            acc + params.bias[static_cast<std::size_t>(o)];
      }
    }
  }
  return out;
}

Tensor3 conv_intermediate(const Tensor3& input, const LayerSpec& layer, const LayerParams& params,
                          int out_channel, int in_channel) {
  const Shape3 out_shape = detail::check_conv_args(input, layer, params);
  if (out_channel < 0 || out_channel >= out_shape.channels) {
    throw Error(ErrorKind::Bounds, "output channel " + std::to_string(out_channel) +
                                       " outside layer '" + layer.name + "' with " +
                                       std::to_string(out_shape.channels) + " channels");
  }
  if (in_channel < 0 || in_channel >= input.channels()) {
    throw Error(ErrorKind::Bounds, "input channel " + std::to_string(in_channel) +
                                       " outside layer '" + layer.name + "' input with " +
                                       std::to_string(input.channels()) + " channels");
  }
  const auto& hp = layer.conv;
  const int k = hp.kernel_size;
  const auto kernel = conv_kernel(params, hp, input.channels(), out_channel, in_channel);
  Tensor3 out(out_shape.height, out_shape.width, 1);
  for (int h = 0; h < out_shape.height; ++h) {
    const TapRange rows = valid_taps(h, hp.stride, hp.padding, k, input.height());
    for (int w = 0; w < out_shape.width; ++w) {
      const TapRange cols = valid_taps(w, hp.stride, hp.padding, k, input.width());
      float acc = 0.0f;
      for (int r = rows.lo; r < rows.hi; ++r)
        for (int q = cols.lo; q < cols.hi; ++q)
          acc += input(h * hp.stride - hp.padding + r, w * hp.stride - hp.padding + q,
                       in_channel) *
                 kernel[static_cast<std::size_t>(r * k + q)];
      out(h, w, 0) = acc;
    }
  }
  return out;
}

Tensor3 relu_forward(const Tensor3& input) {
  Tensor3 out(input.shape());
  const float* src = input.data().data();
  float* dst = out.data().data();
  const auto n = static_cast<std::ptrdiff_t>(input.size());
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(n) > kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = std::max(0.0f, src[i]);
  return out;
}

Tensor3 maxpool_forward(const Tensor3& input, int pool_size, int stride) {
  const Shape3 out_shape = detail::check_pool_args(input, pool_size, stride);
  Tensor3 out(out_shape);
  const int oc = out_shape.channels;
  const int oh = out_shape.height;
  const std::size_t work = out_shape.size() * static_cast<std::size_t>(pool_size * pool_size);
#pragma omp parallel for collapse(2) schedule(static) if (work > kParallelThreshold)
  for (int c = 0; c < oc; ++c) {
    for (int h = 0; h < oh; ++h) {
      for (int w = 0; w < out_shape.width; ++w) {
        float best = input(h * stride, w * stride, c);
        for (int r = 0; r < pool_size; ++r)
          for (int q = 0; q < pool_size; ++q)
            best = std::max(best, input(h * stride + r, w * stride + q, c));
        out(h, w, c) = best;
      }
    }
  }
  return out;
}

Tensor3 flatten_forward(const Tensor3& input) {
  const std::vector<float> values(input.data().begin(), input.data().end());
  return Tensor3(Shape3{1, 1, static_cast<int>(input.size())}, values);
}

Tensor3 dense_forward(const Tensor3& flat, const LayerSpec& layer, const LayerParams& params) {
  detail::check_dense_args(flat, layer, params);
  const auto n = flat.size();
  const int units = layer.dense.out_units;
  const float* x = flat.data().data();
  Tensor3 out(1, 1, units);
  float* dst = out.data().data();
#pragma omp parallel for schedule(static) if (n * static_cast<std::size_t>(units) > kParallelThreshold)
  for (int o = 0; o < units; ++o) {
    const float* row = params.weights.data() + static_cast<std::size_t>(o) * n;
    float acc = 0.0f;
    for (std::size_t f = 0; f < n; ++f) acc += row[f] * x[f];
    dst[o] = acc + params.bias[static_cast<std::size_t>(o)];
  }
  return out;
}

std::vector<float> softmax(std::span<const float> logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> e(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - top);
    total += e[i];
  }
  std::vector<float> p(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) p[i] = static_cast<float>(e[i] / total);
  return p;
}

std::size_t argmax(std::span<const float> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

}  // namespace cnnscope
