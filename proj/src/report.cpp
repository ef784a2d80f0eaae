#include "cnnscope/report.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

namespace cnnscope {

Json shape_json(const Shape3& s) { return Json::array({s.height, s.width, s.channels}); }

Json tensor_json(const Tensor3& t, TensorEncoding encoding) {
  if (encoding == TensorEncoding::Base64) {
    Json j;
    j["dtype"] = "f32le";
    j["shape"] = shape_json(t.shape());
    j["base64"] = base64_encode(floats_to_le_bytes(t.data()));
    return j;
  }
  Json rows = Json::array();
  for (int h = 0; h < t.height(); ++h) {
    Json cols = Json::array();
    for (int w = 0; w < t.width(); ++w) {
      Json ch = Json::array();
      for (int c = 0; c < t.channels(); ++c) ch.push_back(t(h, w, c));
      cols.push_back(std::move(ch));
    }
    rows.push_back(std::move(cols));
  }
  return rows;
}

namespace {

Json grid_json(std::span<const float> values, int size) {
  Json rows = Json::array();
  for (int r = 0; r < size; ++r) {
    Json row = Json::array();
    for (int q = 0; q < size; ++q) row.push_back(values[static_cast<std::size_t>(r * size + q)]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

Json activation_dump(const InferenceSession& session, const DumpOptions& options) {
  const auto& desc = session.model->descriptor;
  std::set<std::size_t> selected;
  for (const auto& name : options.layers) selected.insert(desc.require_layer(name));
  const auto wanted = [&](std::size_t i) { return selected.empty() || selected.count(i) > 0; };

  Json dump;
  dump["modelName"] = session.model->metadata.name;
  dump["inputDigest"] = tensor_digest(session.input);
  dump["colorScope"] = std::string(to_string(options.scope));
  Json probs = Json::object();
  for (std::size_t i = 0; i < desc.class_labels.size(); ++i)
    probs[desc.class_labels[i]] = session.probabilities[i];
  dump["classProbabilities"] = probs;

  const auto scales = color_scales(session, options.scope);
  const auto scale_of = [&](const std::string& layer) {
    for (const auto& s : scales)
      if (std::find(s.layers.begin(), s.layers.end(), layer) != s.layers.end()) return s.max_abs;
    return 0.0f;
  };

  Json per_layer = Json::array();
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    if (!wanted(i)) continue;
    const auto& t = session.activations[i];
    Json entry;
    entry["layerName"] = desc.layers[i].name;
    entry["kind"] = std::string(to_string(desc.layers[i].kind));
    entry["shape"] = shape_json(t.shape());
    entry["values"] = tensor_json(t, options.encoding);
    entry["colorScaleMaxAbs"] = scale_of(desc.layers[i].name);
    per_layer.push_back(std::move(entry));
  }
  dump["perLayer"] = std::move(per_layer);

  if (options.include_intermediates) {
    Json decomps = Json::array();
    for (std::size_t i = 0; i < desc.layers.size(); ++i) {
      if (!wanted(i) || desc.layers[i].kind != LayerKind::Conv) continue;
      for (int o = 0; o < desc.layers[i].conv.out_channels; ++o)
        decomps.push_back(conv_decomposition_json(
            decompose_conv_neuron(session, desc.layers[i].name, o), options.encoding));
    }
    dump["convDecompositions"] = std::move(decomps);
    Json wirings = Json::array();
    const std::size_t fi = flatten_index(desc);
    const int units = wanted(fi) || wanted(fi + 1) ? desc.layers.at(fi + 1).dense.out_units : 0;
    for (int c = 0; c < units; ++c)
      wirings.push_back(flatten_wiring_json(flatten_wiring(session, c), desc));
    dump["flattenWirings"] = std::move(wirings);
  }
  return dump;
}

Json conv_decomposition_json(const ConvDecomposition& d, TensorEncoding encoding) {
  Json j;
  j["layerName"] = d.layer_name;
  j["outChannel"] = d.out_channel;
  j["bias"] = d.bias;
  j["kernelSize"] = d.kernel_size;
  Json inter = Json::array();
  for (const auto& t : d.intermediates) inter.push_back(tensor_json(t, encoding));
  j["intermediates"] = std::move(inter);
  Json kernels = Json::array();
  for (const auto& k : d.kernels) kernels.push_back(grid_json(k, d.kernel_size));
  j["kernels"] = std::move(kernels);
  j["reconstructed"] = tensor_json(d.reconstructed, encoding);
  return j;
}

Json flatten_wiring_json(const FlattenWiring& w, const ArchitectureDescriptor& desc) {
  Json j;
  j["classIndex"] = w.class_index;
  const auto& labels = desc.class_labels;
  if (w.target_layer == desc.layers.back().name &&
      static_cast<std::size_t>(w.class_index) < labels.size())
    j["classLabel"] = labels[static_cast<std::size_t>(w.class_index)];
  j["sourceLayer"] = w.source_layer;
  j["targetLayer"] = w.target_layer;
  j["bias"] = w.bias;
  j["logit"] = w.logit;
  // Columnar edges: entry k of every array describes flat index k.
  Json src = Json::array(), value = Json::array(), weight = Json::array(),
       contrib = Json::array();
  for (const auto& e : w.edges) {
    src.push_back(Json::array({e.source.row, e.source.col, e.source.channel}));
    value.push_back(e.source_value);
    weight.push_back(e.weight);
    contrib.push_back(e.contribution);
  }
  j["edges"] = {{"source", std::move(src)},
                {"sourceValue", std::move(value)},
                {"weight", std::move(weight)},
                {"contribution", std::move(contrib)}};
  return j;
}

Json window_trace_json(const WindowTrace& t) {
  Json j;
  j["kind"] = std::string(to_string(t.kind));
  j["layerName"] = t.layer_name;
  j["outChannel"] = t.out_channel;
  j["inChannel"] = t.in_channel;
  j["row"] = t.row;
  j["col"] = t.col;
  j["inputWindow"] = {{"originRow", t.input_window.origin_row},
                      {"originCol", t.input_window.origin_col},
                      {"size", t.input_window.size},
                      {"values", grid_json(t.input_window.values, t.input_window.size)}};
  if (t.kind == LayerKind::Conv) {
    j["kernelValues"] = grid_json(t.kernel_values, t.input_window.size);
    j["products"] = grid_json(t.products, t.input_window.size);
  }
  j["result"] = t.result;
  return j;
}

Json color_scales_json(const std::vector<ColorScale>& scales) {
  Json arr = Json::array();
  for (const auto& s : scales) {
    arr.push_back({{"scope", std::string(to_string(s.scope))},
                   {"scopeKey", s.scope_key},
                   {"layers", s.layers},
                   {"maxAbs", s.max_abs}});
  }
  return arr;
}

Json topology_json(const std::vector<LayerTopology>& topology) {
  Json arr = Json::array();
  for (const auto& t : topology) {
    Json edges = Json::array();
    for (const auto& [s, d] : t.edges) edges.push_back(Json::array({s, d}));
    arr.push_back({{"layerName", t.layer_name},
                   {"connectivity", std::string(to_string(t.connectivity))},
                   {"sourceLayer", t.source_layer},
                   {"sourceNeurons", t.source_neurons},
                   {"targetNeurons", t.target_neurons},
                   {"edges", std::move(edges)}});
  }
  return arr;
}

std::string classification_table(const InferenceSession& session) {
  const auto& labels = session.model->descriptor.class_labels;
  const auto& p = session.probabilities;
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  std::size_t width = 5;
  for (const auto& l : labels) width = std::max(width, l.size());
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-*s  %s\n", static_cast<int>(width), "class", "probability");
  out += line;
  for (std::size_t i : order) {
    std::snprintf(line, sizeof line, "%-*s  %.4f\n", static_cast<int>(width), labels[i].c_str(),
                  static_cast<double>(p[i]));
    out += line;
  }
  return out;
}

Rgb8Image render_heatmap(const Tensor3& t, int channel, const ColorScale& scale) {
  if (channel < 0 || channel >= t.channels())
    throw Error(ErrorKind::Bounds, "channel " + std::to_string(channel) + " outside tensor " +
                                       to_string(t.shape()));
  Rgb8Image img{t.height(), t.width(), {}};
  img.pixels.reserve(static_cast<std::size_t>(t.height()) * t.width() * 3);
  for (int h = 0; h < t.height(); ++h) {
    for (int w = 0; w < t.width(); ++w) {
      const auto c = scale.rgb(t(h, w, channel));
      img.pixels.insert(img.pixels.end(), c.begin(), c.end());
    }
  }
  return img;
}

}  // namespace cnnscope
