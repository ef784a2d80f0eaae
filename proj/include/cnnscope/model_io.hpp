#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "cnnscope/io.hpp"
#include "cnnscope/weights.hpp"

namespace cnnscope {

// Model bundle format
// -------------------
// A bundle is two files:
//
//   manifest (JSON text, keys sorted, 2-space indent, trailing newline)
//     {
//       "classLabels": [...],
//       "dtype": "f32le",
//       "formatVersion": 1,
//       "inputShape": [height, width, channels],
//       "layers": [{"groupTag": {"module": m, "unit": u},
//                   "hyper": {...}, "kind": "conv", "name": "conv_1_1"}, ...],
//       "name": ..., "provenance": ..., "version": ...,
//       "totalParams": N,
//       "weightsFile": "<file name, relative to the manifest>"
//     }
//     hyper is {"kernelSize","stride","padding","outChannels"} for conv,
//     {"poolSize","stride"} for maxpool, {"outUnits"} for dense, {} otherwise.
//
//   weights (raw little-endian binary32, no header, no padding)
//     layers in manifest order; per conv layer the kernels as
//     [outChannel][inChannel][row][col] followed by outChannels biases; per
//     dense layer the matrix as [outUnit][flatIndex] followed by outUnits
//     biases. Total length is totalParams * 4 bytes.

inline constexpr int kFormatVersion = 1;

struct SavedModel {
  std::string manifest;
  Bytes weights;
};

SavedModel save_model(const ModelBundle& bundle);

/// Parses and fully validates a bundle. Errors: Parse (malformed manifest,
/// with location), Corrupt (blob length, expected vs actual bytes),
/// Validation (non-finite weight with layer and offset, bad architecture).
ModelBundle load_model(std::string_view manifest, std::span<const std::uint8_t> weights);

/// Reads the manifest and the weights file it names (relative to the manifest).
ModelBundle load_model_files(const std::filesystem::path& manifest_path);
/// Writes the manifest to `manifest_path` and the weights next to it.
void save_model_files(const ModelBundle& bundle, const std::filesystem::path& manifest_path);

/// Parses only the architecture part of a manifest.
ArchitectureDescriptor parse_descriptor(std::string_view manifest);

/// Deterministic pseudo-random weights in [-0.5, 0.5).
///
/// Generator: std::mt19937 seeded with `seed`; every parameter, in weight-blob
/// order, takes one draw u and becomes (u >> 8) * 2^-24 - 0.5. The recipe is
/// recorded in the bundle's provenance string.
ModelBundle make_fixture_model(std::uint32_t seed, const ArchitectureDescriptor& descriptor);

/// All weights and biases zero.
ModelBundle make_zero_model(const ArchitectureDescriptor& descriptor);

/// Deterministic RGB test image with values p/255 for bytes p drawn from
/// std::mt19937(seed) as u >> 24.
Tensor3 make_sample_image(std::uint32_t seed, Shape3 shape);

}  // namespace cnnscope
