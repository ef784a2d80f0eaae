// Single-threaded kernels. Kept as the baseline for the OpenMP versions in
// kernels.cpp: both must agree bit for bit.

#include <algorithm>

#include "cnnscope/kernels.hpp"

namespace cnnscope::serial {

Tensor3 conv_forward(const Tensor3& input, const LayerSpec& layer, const LayerParams& params) {
  const Shape3 out_shape = detail::check_conv_args(input, layer, params);
  const auto& hp = layer.conv;
  const int k = hp.kernel_size;
  const int in_c = input.channels();
  Tensor3 out(out_shape);
  for (int o = 0; o < out_shape.channels; ++o) {
    for (int h = 0; h < out_shape.height; ++h) {
      for (int w = 0; w < out_shape.width; ++w) {
        float acc = 0.0f;
        for (int i = 0; i < in_c; ++i) {
          const auto kernel = conv_kernel(params, hp, in_c, o, i);
          for (int r = 0; r < k; ++r) {
            const int y = h * hp.stride - hp.padding + r;
            if (y < 0 || y >= input.height()) continue;
            for (int q = 0; q < k; ++q) {
              const int x = w * hp.stride - hp.padding + q;
              if (x < 0 || x >= input.width()) continue;
              acc += input(y, x, i) * kernel[static_cast<std::size_t>(r * k + q)];
            }
          }
        }
        out(h, w, o) = acc + params.bias[static_cast<std::size_t>(o)];
      }
    }
  }
  return out;
}

Tensor3 relu_forward(const Tensor3& input) {
  Tensor3 out(input.shape());
  auto src = input.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::max(0.0f, src[i]);
  return out;
}

Tensor3 maxpool_forward(const Tensor3& input, int pool_size, int stride) {
  const Shape3 out_shape = detail::check_pool_args(input, pool_size, stride);
  Tensor3 out(out_shape);
  for (int c = 0; c < out_shape.channels; ++c) {
    for (int h = 0; h < out_shape.height; ++h) {
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

Tensor3 dense_forward(const Tensor3& flat, const LayerSpec& layer, const LayerParams& params) {
  detail::check_dense_args(flat, layer, params);
  const auto n = flat.size();
  const int units = layer.dense.out_units;
  auto x = flat.data();
  Tensor3 out(1, 1, units);
  for (int o = 0; o < units; ++o) {
    const float* row = params.weights.data() + static_cast<std::size_t>(o) * n;
    float acc = 0.0f;
    for (std::size_t f = 0; f < n; ++f) acc += row[f] * x[f];
    out(0, 0, o) = acc + params.bias[static_cast<std::size_t>(o)];
  }
  return out;
}

}  // namespace cnnscope::serial
