#pragma once

#include <string>
#include <vector>

#include "cnnscope/image.hpp"
#include "cnnscope/introspection.hpp"
#include "cnnscope/json.hpp"

namespace cnnscope {

// Structured (JSON) views of sessions and introspection records. The CLI's
// dump files and the bridge's payloads are both built here, so the two never
// disagree.

enum class TensorEncoding {
  Nested,  // values as nested [row][col][channel] arrays
  Base64,  // {"dtype": "f32le", "shape": [...], "base64": "..."}
};

Json tensor_json(const Tensor3& t, TensorEncoding encoding = TensorEncoding::Nested);
Json shape_json(const Shape3& s);

struct DumpOptions {
  std::vector<std::string> layers;  // empty: every layer
  bool include_intermediates = false;
  ColorScope scope = ColorScope::Layer;
  TensorEncoding encoding = TensorEncoding::Nested;
};

/// Activation dump: modelName, inputDigest, classProbabilities, colorScope and
/// perLayer entries in network order; with include_intermediates also every
/// conv decomposition and the flatten wiring of every class.
Json activation_dump(const InferenceSession& session, const DumpOptions& options = {});

Json conv_decomposition_json(const ConvDecomposition& d,
                             TensorEncoding encoding = TensorEncoding::Nested);
Json flatten_wiring_json(const FlattenWiring& w, const ArchitectureDescriptor& desc);
Json window_trace_json(const WindowTrace& t);
Json color_scales_json(const std::vector<ColorScale>& scales);
Json topology_json(const std::vector<LayerTopology>& topology);

/// "label  probability" lines, probabilities descending (ties by class
/// index), four decimals.
std::string classification_table(const InferenceSession& session);

/// Heatmap of one channel plane under `scale`.
Rgb8Image render_heatmap(const Tensor3& t, int channel, const ColorScale& scale);

}  // namespace cnnscope
