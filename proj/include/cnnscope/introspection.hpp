#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cnnscope/engine.hpp"

namespace cnnscope {

// View-backing data derived on demand from a finished InferenceSession.

/// One conv neuron split into its per-input-channel convolutions.
struct ConvDecomposition {
  std::string layer_name;
  int out_channel = 0;
  std::vector<Tensor3> intermediates;       // one H'xW'x1 plane per input channel, no bias
  std::vector<std::vector<float>> kernels;  // kernelSize^2 values per input channel
  int kernel_size = 0;
  float bias = 0.0f;
  Tensor3 reconstructed;  // sum of intermediates in channel order, then + bias
};

ConvDecomposition decompose_conv_neuron(const InferenceSession& session,
                                        std::string_view layer_name, int out_channel);

struct Coord3 {
  int row = 0;
  int col = 0;
  int channel = 0;
  friend bool operator==(const Coord3&, const Coord3&) = default;
};

struct FlattenEdge {
  Coord3 source;  // position in the pre-flatten layer
  int flat_index = 0;
  float source_value = 0.0f;
  float weight = 0.0f;
  float contribution = 0.0f;  // source_value * weight
};

/// Edges from every flatten element into one unit of the dense layer that
/// follows the flatten layer.
struct FlattenWiring {
  int class_index = 0;
  std::string source_layer;  // layer feeding the flatten layer
  std::string target_layer;  // dense layer fed by the flatten layer
  std::vector<FlattenEdge> edges;
  float bias = 0.0f;
  float logit = 0.0f;  // stored activation of the target unit
};

FlattenWiring flatten_wiring(const InferenceSession& session, int class_index);

struct WindowTrace {
  LayerKind kind = LayerKind::ReLU;
  std::string layer_name;
  int out_channel = 0;
  int in_channel = 0;  // Conv: the traced input channel; otherwise equals out_channel
  int row = 0;
  int col = 0;
  Window input_window;                // 1x1 for ReLU
  std::vector<float> kernel_values;   // Conv only, row-major
  std::vector<float> products;        // Conv only, row-major
  float result = 0.0f;
};

/// Trace of the computation behind output pixel (row, col) of `out_channel`.
/// For conv layers `in_channel` picks which intermediate result is traced and
/// `result` equals that intermediate's value (bias not included).
WindowTrace trace_window(const InferenceSession& session, std::string_view layer_name,
                         int out_channel, int row, int col, int in_channel = 0);

/// Visiting order of the sliding window: output positions in row-major order.
std::vector<std::pair<int, int>> window_positions(const InferenceSession& session,
                                                  std::string_view layer_name);

enum class ColorScope { Layer, Unit, Module, Global };

std::string_view to_string(ColorScope scope);
std::optional<ColorScope> color_scope_from_string(std::string_view name);

/// Symmetric diverging red-white-blue scale.
struct ColorScale {
  ColorScope scope = ColorScope::Layer;
  std::string scope_key;             // layer name, "unit:N", "module:N" or "global"
  std::vector<std::string> layers;   // member layers
  float max_abs = 0.0f;

  /// v / maxAbs clamped to [-1, 1]; 0 everywhere when maxAbs is 0.
  float position(float v) const;
  /// -1 -> (255,0,0), 0 -> (255,255,255), +1 -> (0,0,255).
  std::array<std::uint8_t, 3> rgb(float v) const;
};

/// One scale per group of the scope; the input image is never part of a scale.
std::vector<ColorScale> color_scales(const InferenceSession& session, ColorScope scope);

/// The scale of `scope` that contains layer `layer_index`.
ColorScale color_scale_for_layer(const InferenceSession& session, ColorScope scope,
                                 std::size_t layer_index);

enum class Connectivity {
  Full,      // every source neuron feeds every target neuron (conv, dense)
  OneToOne,  // target channel c reads source channel c (relu, maxpool)
  Unroll,    // each source element maps to one flat neuron (flatten)
};

std::string_view to_string(Connectivity c);

struct LayerTopology {
  std::string layer_name;
  Connectivity connectivity = Connectivity::Full;
  std::string source_layer;  // "input" for the first layer
  int source_neurons = 0;
  int target_neurons = 0;
  std::vector<std::pair<int, int>> edges;  // (source neuron, target neuron)
};

/// Neuron-level wiring of every layer, as drawn in the overview. The dense
/// layer after flatten is reported against the pre-flatten layer's channels.
std::vector<LayerTopology> edge_topology(const ModelBundle& model);

}  // namespace cnnscope
