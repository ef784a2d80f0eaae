#pragma once

#include <span>
#include <vector>

#include "cnnscope/architecture.hpp"
#include "cnnscope/tensor.hpp"
#include "cnnscope/weights.hpp"

namespace cnnscope {

// Layer kernels. Every kernel has a fixed floating-point evaluation order so
// that results are reproducible bit for bit:
//
//   conv:  out(h,w,o) = (sum over in-channel i, kernel row r, kernel col q of
//                        in(h*s-p+r, w*s-p+q, i) * k[o][i](r,q)) + bias(o)
//          accumulated in that loop order from +0, taps in the zero padding
//          contribute nothing;
//   dense: out(o) = (sum over ascending f of m[o][f] * x(f)) + bias(o).
//
// The functions in this namespace split work across OpenMP threads by output
// element; each element is still computed by one thread in the order above.
// cnnscope::serial holds a plain single-threaded version of every kernel that
// produces identical bits.

Tensor3 conv_forward(const Tensor3& input, const LayerSpec& layer, const LayerParams& params);
Tensor3 relu_forward(const Tensor3& input);
Tensor3 maxpool_forward(const Tensor3& input, int pool_size, int stride);
Tensor3 flatten_forward(const Tensor3& input);
/// `flat` must be 1x1xN with N equal to the matrix column count. Returns 1x1xoutUnits.
Tensor3 dense_forward(const Tensor3& flat, const LayerSpec& layer, const LayerParams& params);

/// Max-subtracted softmax; evaluated in double and rounded to float.
std::vector<float> softmax(std::span<const float> logits);

/// Convolution of one input channel with the (out_channel, in_channel) kernel,
/// no bias, same geometry and accumulation order as conv_forward. Returns an
/// H'xW'x1 plane.
Tensor3 conv_intermediate(const Tensor3& input, const LayerSpec& layer, const LayerParams& params,
                          int out_channel, int in_channel);

/// Index of the first maximum.
std::size_t argmax(std::span<const float> values);

namespace serial {

Tensor3 conv_forward(const Tensor3& input, const LayerSpec& layer, const LayerParams& params);
Tensor3 relu_forward(const Tensor3& input);
Tensor3 maxpool_forward(const Tensor3& input, int pool_size, int stride);
Tensor3 dense_forward(const Tensor3& flat, const LayerSpec& layer, const LayerParams& params);

}  // namespace serial

namespace detail {

// Shared argument checks; throw Error(Shape) / Error(Model).
Shape3 check_conv_args(const Tensor3& input, const LayerSpec& layer, const LayerParams& params);
Shape3 check_pool_args(const Tensor3& input, int pool_size, int stride);
void check_dense_args(const Tensor3& flat, const LayerSpec& layer, const LayerParams& params);

}  // namespace detail

}  // namespace cnnscope
