#pragma once

#include <cstdint>
#include <span>

#include "cnnscope/io.hpp"
#include "cnnscope/tensor.hpp"

namespace cnnscope {

/// RGB input with every value in [0, 1].
struct InputImage {
  Tensor3 pixels;
};

/// Decodes PNG (8-bit gray/RGB/RGBA, alpha dropped) or raw RGB8 bytes and
/// maps byte p to p / 255. Raw input is recognized only when the byte count is
/// exactly height * width * 3 of the target shape.
///
/// Errors: Format for undecodable bytes, Dimension for a PNG whose size
/// differs from `target` (no resampling).
InputImage ingest_image(std::span<const std::uint8_t> encoded, Shape3 target);

/// Interleaved 8-bit RGB, row-major.
struct Rgb8Image {
  int height = 0;
  int width = 0;
  Bytes pixels;
};

Bytes encode_png(const Rgb8Image& image);
/// Decodes to RGB8; throws Error(Format).
Rgb8Image decode_png(std::span<const std::uint8_t> encoded);

/// round(v * 255) per channel; `t` must have 3 channels with values in [0, 1].
Rgb8Image tensor_to_rgb8(const Tensor3& t);

/// Nearest-neighbour integer upscale.
Rgb8Image upscale(const Rgb8Image& image, int factor);

}  // namespace cnnscope
