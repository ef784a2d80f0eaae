#include "cnnscope/introspection.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cnnscope {

namespace {

std::size_t layer_of_kind(const InferenceSession& session, std::string_view name,
                          std::initializer_list<LayerKind> kinds, std::string_view what) {
  const auto& desc = session.model->descriptor;
  const std::size_t idx = desc.require_layer(name);
  const auto kind = desc.layers[idx].kind;
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
    throw Error(ErrorKind::Query, "layer '" + std::string(name) + "' is a " +
                                      std::string(to_string(kind)) + " layer; " +
                                      std::string(what));
  }
  return idx;
}

void check_channel(int channel, int count, std::string_view layer) {
  if (channel < 0 || channel >= count) {
    throw Error(ErrorKind::Bounds, "channel " + std::to_string(channel) + " outside layer '" +
                                       std::string(layer) + "' with " + std::to_string(count) +
                                       " channels");
  }
}

}  // namespace

ConvDecomposition decompose_conv_neuron(const InferenceSession& session,
                                        std::string_view layer_name, int out_channel) {
  const std::size_t idx =
      layer_of_kind(session, layer_name, {LayerKind::Conv}, "decomposition needs a conv layer");
  const auto& layer = session.model->descriptor.layers[idx];
  const auto& params = session.model->weights.layers[idx];
  const Tensor3& input = session.layer_input(idx);
  check_channel(out_channel, layer.conv.out_channels, layer_name);

  ConvDecomposition d;
  d.layer_name = layer.name;
  d.out_channel = out_channel;
  d.kernel_size = layer.conv.kernel_size;
  d.bias = params.bias[static_cast<std::size_t>(out_channel)];
  for (int i = 0; i < input.channels(); ++i) {
    d.intermediates.push_back(conv_intermediate(input, layer, params, out_channel, i));
    const auto k = conv_kernel(params, layer.conv, input.channels(), out_channel, i);
    d.kernels.emplace_back(k.begin(), k.end());
  }

  const Shape3 plane = d.intermediates.front().shape();
  d.reconstructed = Tensor3(plane, 0.0f);
  auto sum = d.reconstructed.data();
  for (const auto& inter : d.intermediates) {
    auto v = inter.data();
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += v[j];
  }
  for (auto& s : sum) s += d.bias;
  return d;
}

FlattenWiring flatten_wiring(const InferenceSession& session, int class_index) {
  const auto& desc = session.model->descriptor;
  const std::size_t fi = flatten_index(desc);
  if (fi + 1 >= desc.layers.size() || desc.layers[fi + 1].kind != LayerKind::Dense)
    throw Error(ErrorKind::Query, "flatten layer is not followed by a dense layer");
  const auto& dense = desc.layers[fi + 1];
  const auto& params = session.model->weights.layers[fi + 1];
  if (class_index < 0 || class_index >= dense.dense.out_units) {
    throw Error(ErrorKind::Bounds, "class index " + std::to_string(class_index) +
                                       " outside 0.." + std::to_string(dense.dense.out_units - 1));
  }

  const Tensor3& source = session.layer_input(fi);
  const auto flat = session.activations[fi].data();
  const std::size_t n = flat.size();
  const float* row = params.weights.data() + static_cast<std::size_t>(class_index) * n;

  FlattenWiring wiring;
  wiring.class_index = class_index;
  wiring.source_layer = fi == 0 ? "input" : desc.layers[fi - 1].name;
  wiring.target_layer = dense.name;
  wiring.bias = params.bias[static_cast<std::size_t>(class_index)];
  wiring.logit = session.activations[fi + 1](0, 0, class_index);
  wiring.edges.reserve(n);
  const int channels = source.channels();
  const int width = source.width();
  for (std::size_t f = 0; f < n; ++f) {
    const int fi_int = static_cast<int>(f);
    FlattenEdge e;
    e.source = {fi_int / (channels * width), (fi_int / channels) % width, fi_int % channels};
    e.flat_index = fi_int;
    e.source_value = flat[f];
    e.weight = row[f];
    e.contribution = e.source_value * e.weight;
    wiring.edges.push_back(e);
  }
  return wiring;
}

WindowTrace trace_window(const InferenceSession& session, std::string_view layer_name,
                         int out_channel, int row, int col, int in_channel) {
  const std::size_t idx =
      layer_of_kind(session, layer_name, {LayerKind::Conv, LayerKind::ReLU, LayerKind::MaxPool},
                    "window traces cover conv, relu and maxpool layers");
  const auto& layer = session.model->descriptor.layers[idx];
  const Tensor3& input = session.layer_input(idx);
  const Tensor3& output = session.activations[idx];
  check_channel(out_channel, output.channels(), layer_name);
  if (row < 0 || row >= output.height() || col < 0 || col >= output.width()) {
    throw Error(ErrorKind::Bounds, "pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                                       ") outside " + std::to_string(output.height()) + "x" +
                                       std::to_string(output.width()) + " output of layer '" +
                                       layer.name + "'");
  }

  WindowTrace t;
  t.kind = layer.kind;
  t.layer_name = layer.name;
  t.out_channel = out_channel;
  t.in_channel = out_channel;
  t.row = row;
  t.col = col;
  switch (layer.kind) {
    case LayerKind::Conv: {
      check_channel(in_channel, input.channels(), "input of " + layer.name);
      const auto& hp = layer.conv;
      t.in_channel = in_channel;
      t.input_window = extract_window_padded(input, in_channel, row * hp.stride - hp.padding,
                                             col * hp.stride - hp.padding, hp.kernel_size);
      const auto kernel = conv_kernel(session.model->weights.layers[idx], hp, input.channels(),
                                      out_channel, in_channel);
      t.kernel_values.assign(kernel.begin(), kernel.end());
      float acc = 0.0f;
      for (std::size_t j = 0; j < kernel.size(); ++j) {
        t.products.push_back(t.input_window.values[j] * kernel[j]);
        acc += t.products.back();
      }
      t.result = acc;
      break;
    }
    case LayerKind::ReLU:
      t.input_window = extract_window(input, out_channel, row, col, 1);
      t.result = std::max(0.0f, t.input_window.values.front());
      break;
    case LayerKind::MaxPool: {
      const auto& p = layer.pool;
      t.input_window = extract_window(input, out_channel, row * p.stride, col * p.stride,
                                      p.pool_size);
      float best = t.input_window.values.front();
      for (float v : t.input_window.values) best = std::max(best, v);
      t.result = best;
      break;
    }
    default:
      break;
  }
  return t;
}

std::vector<std::pair<int, int>> window_positions(const InferenceSession& session,
                                                  std::string_view layer_name) {
  const Tensor3& out = session.activation(layer_name);
  std::vector<std::pair<int, int>> pos;
  pos.reserve(static_cast<std::size_t>(out.height()) * static_cast<std::size_t>(out.width()));
  for (int h = 0; h < out.height(); ++h)
    for (int w = 0; w < out.width(); ++w) pos.emplace_back(h, w);
  return pos;
}

std::string_view to_string(ColorScope scope) {
  switch (scope) {
    case ColorScope::Layer: return "layer";
    case ColorScope::Unit: return "unit";
    case ColorScope::Module: return "module";
    case ColorScope::Global: return "global";
  }
  return "layer";
}

std::optional<ColorScope> color_scope_from_string(std::string_view name) {
  if (name == "layer") return ColorScope::Layer;
  if (name == "unit") return ColorScope::Unit;
  if (name == "module") return ColorScope::Module;
  if (name == "global") return ColorScope::Global;
  return std::nullopt;
}

float ColorScale::position(float v) const {
  if (max_abs == 0.0f) return 0.0f;
  return std::clamp(v / max_abs, -1.0f, 1.0f);
}

std::array<std::uint8_t, 3> ColorScale::rgb(float v) const {
  const float p = position(v);
  const auto fade = static_cast<std::uint8_t>(std::lround(255.0f * (1.0f - std::fabs(p))));
  if (p < 0.0f) return {255, fade, fade};
  if (p > 0.0f) return {fade, fade, 255};
  return {255, 255, 255};
}

namespace {

std::string scope_key(ColorScope scope, const LayerSpec& layer) {
  switch (scope) {
    case ColorScope::Layer: return layer.name;
    case ColorScope::Unit: return "unit:" + std::to_string(layer.group.unit);
    case ColorScope::Module: return "module:" + std::to_string(layer.group.module);
    case ColorScope::Global: return "global";
  }
  return layer.name;
}

}  // namespace

std::vector<ColorScale> color_scales(const InferenceSession& session, ColorScope scope) {
  const auto& layers = session.model->descriptor.layers;
  std::vector<ColorScale> scales;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string key = scope_key(scope, layers[i]);
    auto [it, inserted] = slot.emplace(key, scales.size());
    if (inserted) scales.push_back(ColorScale{scope, key, {}, 0.0f});
    auto& scale = scales[it->second];
    scale.layers.push_back(layers[i].name);
    scale.max_abs = std::max(scale.max_abs, max_abs(session.activations[i]));
  }
  return scales;
}

ColorScale color_scale_for_layer(const InferenceSession& session, ColorScope scope,
                                 std::size_t layer_index) {
  const std::string key = scope_key(scope, session.model->descriptor.layers.at(layer_index));
  for (auto& s : color_scales(session, scope))
    if (s.scope_key == key) return s;
  throw Error(ErrorKind::Query, "no color scale for layer index " + std::to_string(layer_index));
}

std::string_view to_string(Connectivity c) {
  switch (c) {
    case Connectivity::Full: return "full";
    case Connectivity::OneToOne: return "one_to_one";
    case Connectivity::Unroll: return "unroll";
  }
  return "full";
}

std::vector<LayerTopology> edge_topology(const ModelBundle& model) {
  const auto& desc = model.descriptor;
  const auto chain = shape_chain(desc);
  std::vector<LayerTopology> out;
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    const auto& layer = desc.layers[i];
    LayerTopology t;
    t.layer_name = layer.name;
    std::size_t src = i;  // index into chain: shape feeding layer i
    if (layer.kind == LayerKind::Dense && i > 0 && desc.layers[i - 1].kind == LayerKind::Flatten)
      src = i - 1;  // the overview hides flatten: wire dense to the pre-flatten neurons
    t.source_layer = src == 0 ? "input" : desc.layers[src - 1].name;
    t.target_neurons = chain[i + 1].channels;
    switch (layer.kind) {
      case LayerKind::Conv:
      case LayerKind::Dense:
        t.connectivity = Connectivity::Full;
        t.source_neurons = chain[src].channels;
        for (int s = 0; s < t.source_neurons; ++s)
          for (int d = 0; d < t.target_neurons; ++d) t.edges.emplace_back(s, d);
        break;
      case LayerKind::ReLU:
      case LayerKind::MaxPool:
        t.connectivity = Connectivity::OneToOne;
        t.source_neurons = chain[src].channels;
        for (int c = 0; c < t.target_neurons; ++c) t.edges.emplace_back(c, c);
        break;
      case LayerKind::Flatten:
        t.connectivity = Connectivity::Unroll;
        t.source_neurons = static_cast<int>(chain[src].size());
        for (int f = 0; f < t.target_neurons; ++f) t.edges.emplace_back(f, f);
        break;
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace cnnscope
