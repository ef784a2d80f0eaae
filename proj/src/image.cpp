#include "cnnscope/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include <png.h>

namespace cnnscope {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

bool looks_like_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0;
}

Tensor3 rgb8_to_tensor(const std::uint8_t* rgb, int height, int width) {
  Tensor3 t(height, width, 3);
  auto out = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(rgb[i]) / 255.0f;
  return t;
}

}  // namespace

Rgb8Image decode_png(std::span<const std::uint8_t> encoded) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, encoded.data(), encoded.size()))
    throw Error(ErrorKind::Format, std::string("cannot decode PNG: ") + img.message);
  img.format = PNG_FORMAT_RGBA;
  Bytes rgba(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, rgba.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorKind::Format, "cannot decode PNG: " + msg);
  }
  Rgb8Image out{static_cast<int>(img.height), static_cast<int>(img.width), {}};
  out.pixels.reserve(static_cast<std::size_t>(img.width) * img.height * 3);
  for (std::size_t i = 0; i < rgba.size(); i += 4)
    out.pixels.insert(out.pixels.end(), rgba.begin() + static_cast<std::ptrdiff_t>(i),
                      rgba.begin() + static_cast<std::ptrdiff_t>(i + 3));
  return out;
}

InputImage ingest_image(std::span<const std::uint8_t> encoded, Shape3 target) {
  if (target.channels != 3)
    throw Error(ErrorKind::Dimension, "models must take 3-channel RGB input, target is " +
                                          to_string(target));
  if (looks_like_png(encoded)) {
    const Rgb8Image img = decode_png(encoded);
    if (img.height != target.height || img.width != target.width) {
      throw Error(ErrorKind::Dimension,
                  "image is " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                      ", model expects " + std::to_string(target.height) + "x" +
                      std::to_string(target.width));
    }
    return {rgb8_to_tensor(img.pixels.data(), img.height, img.width)};
  }
  if (encoded.size() == target.size())
    return {rgb8_to_tensor(encoded.data(), target.height, target.width)};
  throw Error(ErrorKind::Format,
              "unrecognized image: not a PNG, and " + std::to_string(encoded.size()) +
                  " bytes is not raw RGB8 of " + std::to_string(target.height) + "x" +
                  std::to_string(target.width) + " (" + std::to_string(target.size()) +
                  " bytes)");
}

Bytes encode_png(const Rgb8Image& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr))
    throw Error(ErrorKind::Io, std::string("PNG encoding failed: ") + img.message);
  Bytes out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr))
    throw Error(ErrorKind::Io, std::string("PNG encoding failed: ") + img.message);
  out.resize(size);
  return out;
}

Rgb8Image tensor_to_rgb8(const Tensor3& t) {
  if (t.channels() != 3)
    throw Error(ErrorKind::Shape, "RGB conversion needs 3 channels, got " + to_string(t.shape()));
  Rgb8Image out{t.height(), t.width(), Bytes(t.size())};
  auto in = t.data();
  for (std::size_t i = 0; i < in.size(); ++i)
    out.pixels[i] =
        static_cast<std::uint8_t>(std::lround(std::clamp(in[i], 0.0f, 1.0f) * 255.0f));
  return out;
}

Rgb8Image upscale(const Rgb8Image& image, int factor) {
  if (factor < 1) throw Error(ErrorKind::Shape, "scale factor must be >= 1");
  Rgb8Image out{image.height * factor, image.width * factor, {}};
  out.pixels.resize(static_cast<std::size_t>(out.height) * out.width * 3);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.pixels[(static_cast<std::size_t>(y) * out.width + x) * 3 + c] =
            image.pixels[(static_cast<std::size_t>(y / factor) * image.width + x / factor) * 3 + c];
  return out;
}

}  // namespace cnnscope
