#include "cnnscope/model_io.hpp"

#include <cmath>
#include <random>

#include "cnnscope/json.hpp"

namespace cnnscope {

namespace {

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorKind::Parse, "manifest: " + what);
}

const Json& field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path + " must be an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail("missing field " + path + "." + key);
  return *it;
}

int int_field(const Json& obj, const char* key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_number_integer()) parse_fail(path + "." + key + " must be an integer");
  return v.get<int>();
}

std::string string_field(const Json& obj, const char* key, const std::string& path) {
  const Json& v = field(obj, key, path);
  if (!v.is_string()) parse_fail(path + "." + key + " must be a string");
  return v.get<std::string>();
}

Json layer_to_json(const LayerSpec& l) {
  Json j;
  j["kind"] = std::string(to_string(l.kind));
  j["name"] = l.name;
  j["groupTag"] = {{"unit", l.group.unit}, {"module", l.group.module}};
  Json hyper = Json::object();
  switch (l.kind) {
    case LayerKind::Conv:
      hyper = {{"kernelSize", l.conv.kernel_size},
               {"stride", l.conv.stride},
               {"padding", l.conv.padding},
               {"outChannels", l.conv.out_channels}};
      break;
    case LayerKind::MaxPool:
      hyper = {{"poolSize", l.pool.pool_size}, {"stride", l.pool.stride}};
      break;
    case LayerKind::Dense:
      hyper = {{"outUnits", l.dense.out_units}};
      break;
    default:
      break;
  }
  j["hyper"] = hyper;
  return j;
}

LayerSpec layer_from_json(const Json& j, const std::string& path) {
  LayerSpec l;
  const std::string kind = string_field(j, "kind", path);
  const auto k = layer_kind_from_string(kind);
  if (!k) parse_fail(path + ".kind has unknown value '" + kind + "'");
  l.kind = *k;
  l.name = string_field(j, "name", path);
  const Json& group = field(j, "groupTag", path);
  l.group.unit = int_field(group, "unit", path + ".groupTag");
  l.group.module = int_field(group, "module", path + ".groupTag");
  const std::string hp = path + ".hyper";
  const Json hyper = j.contains("hyper") ? j.at("hyper") : Json::object();
  switch (l.kind) {
    case LayerKind::Conv:
      l.conv.kernel_size = int_field(hyper, "kernelSize", hp);
      l.conv.stride = int_field(hyper, "stride", hp);
      l.conv.padding = int_field(hyper, "padding", hp);
      l.conv.out_channels = int_field(hyper, "outChannels", hp);
      break;
    case LayerKind::MaxPool:
      if (!hyper.is_object()) parse_fail(hp + " must be an object");
      l.pool.pool_size = hyper.contains("poolSize") ? int_field(hyper, "poolSize", hp) : 2;
      l.pool.stride = hyper.contains("stride") ? int_field(hyper, "stride", hp) : 2;
      break;
    case LayerKind::Dense:
      l.dense.out_units = int_field(hyper, "outUnits", hp);
      break;
    default:
      break;
  }
  return l;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    parse_fail(std::string(e.what()) + " (byte " + std::to_string(e.byte) + ")");
  }
}

std::string manifest_text(const ModelBundle& b) {
  const auto& d = b.descriptor;
  Json j;
  j["formatVersion"] = kFormatVersion;
  j["name"] = b.metadata.name;
  j["version"] = b.metadata.version;
  j["provenance"] = b.metadata.provenance;
  j["inputShape"] = {d.input_shape.height, d.input_shape.width, d.input_shape.channels};
  j["layers"] = Json::array();
  for (const auto& l : d.layers) j["layers"].push_back(layer_to_json(l));
  j["classLabels"] = d.class_labels;
  j["weightsFile"] = b.metadata.weights_file;
  j["dtype"] = "f32le";
  j["totalParams"] = parameter_count(d);
  return j.dump(2) + "\n";
}

struct ParsedManifest {
  ArchitectureDescriptor descriptor;
  ModelMetadata metadata;
  std::int64_t total_params = 0;
};

ParsedManifest parse_manifest(std::string_view text) {
  const Json j = parse_json(text);
  if (!j.is_object()) parse_fail("top level must be an object");
  ParsedManifest m;
  const int version = int_field(j, "formatVersion", "$");
  if (version != kFormatVersion)
    parse_fail("unsupported formatVersion " + std::to_string(version));
  if (string_field(j, "dtype", "$") != "f32le") parse_fail("dtype must be \"f32le\"");
  m.metadata.name = string_field(j, "name", "$");
  m.metadata.version = j.contains("version") ? string_field(j, "version", "$") : "1";
  m.metadata.provenance = j.contains("provenance") ? string_field(j, "provenance", "$") : "";
  m.metadata.weights_file = string_field(j, "weightsFile", "$");

  const Json& shape = field(j, "inputShape", "$");
  if (!shape.is_array() || shape.size() != 3) parse_fail("$.inputShape must be [h, w, c]");
  for (const auto& v : shape)
    if (!v.is_number_integer()) parse_fail("$.inputShape entries must be integers");
  m.descriptor.input_shape = {shape[0].get<int>(), shape[1].get<int>(), shape[2].get<int>()};

  const Json& layers = field(j, "layers", "$");
  if (!layers.is_array()) parse_fail("$.layers must be an array");
  for (std::size_t i = 0; i < layers.size(); ++i)
    m.descriptor.layers.push_back(layer_from_json(layers[i], "$.layers[" + std::to_string(i) + "]"));

  const Json& labels = field(j, "classLabels", "$");
  if (!labels.is_array()) parse_fail("$.classLabels must be an array");
  for (const auto& l : labels) {
    if (!l.is_string()) parse_fail("$.classLabels entries must be strings");
    m.descriptor.class_labels.push_back(l.get<std::string>());
  }
  const Json& total = field(j, "totalParams", "$");
  if (!total.is_number_integer()) parse_fail("$.totalParams must be an integer");
  m.total_params = total.get<std::int64_t>();
  return m;
}

// Visits every parameter slot in blob order. The second argument is the
// layer's fan-in (weights per output unit).
template <typename Fn>
void for_each_param_block(const ArchitectureDescriptor& desc, WeightStore& store, Fn&& fn) {
  const auto chain = shape_chain(desc);
  store.layers.assign(desc.layers.size(), {});
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    const auto& l = desc.layers[i];
    std::size_t n_bias = 0;
    if (l.kind == LayerKind::Conv) n_bias = static_cast<std::size_t>(l.conv.out_channels);
    else if (l.kind == LayerKind::Dense) n_bias = static_cast<std::size_t>(l.dense.out_units);
    else continue;
    const std::size_t n_w = layer_parameter_count(l, chain[i]) - n_bias;
    store.layers[i].weights.resize(n_w);
    store.layers[i].bias.resize(n_bias);
    const std::size_t fan_in = n_w / n_bias;
    fn(std::span<float>(store.layers[i].weights), fan_in);
    fn(std::span<float>(store.layers[i].bias), fan_in);
  }
}

}  // namespace

SavedModel save_model(const ModelBundle& bundle) {
  validate_bundle(bundle);
  SavedModel out;
  out.manifest = manifest_text(bundle);
  for (const auto& p : bundle.weights.layers) {
    const Bytes w = floats_to_le_bytes(p.weights);
    const Bytes b = floats_to_le_bytes(p.bias);
    out.weights.insert(out.weights.end(), w.begin(), w.end());
    out.weights.insert(out.weights.end(), b.begin(), b.end());
  }
  return out;
}

ArchitectureDescriptor parse_descriptor(std::string_view manifest) {
  return parse_manifest(manifest).descriptor;
}

ModelBundle load_model(std::string_view manifest, std::span<const std::uint8_t> weights) {
  ParsedManifest m = parse_manifest(manifest);
  validate_descriptor(m.descriptor);
  const std::size_t total = parameter_count(m.descriptor);
  if (m.total_params != static_cast<std::int64_t>(total)) {
    throw Error(ErrorKind::Validation, "manifest totalParams " + std::to_string(m.total_params) +
                                           " disagrees with architecture (" +
                                           std::to_string(total) + ")");
  }
  if (weights.size() != total * 4) {
    throw Error(ErrorKind::Corrupt, "weight blob has " + std::to_string(weights.size()) +
                                        " bytes, expected " + std::to_string(total * 4));
  }
  ModelBundle b;
  b.descriptor = std::move(m.descriptor);
  b.metadata = std::move(m.metadata);
  std::size_t offset = 0;
  for_each_param_block(b.descriptor, b.weights, [&](std::span<float> block, std::size_t) {
    const auto values = le_bytes_to_floats(weights.subspan(offset, block.size() * 4));
    std::copy(values.begin(), values.end(), block.begin());
    offset += block.size() * 4;
  });
  validate_weights(b.descriptor, b.weights);
  return b;
}

ModelBundle load_model_files(const std::filesystem::path& manifest_path) {
  const std::string manifest = read_text_file(manifest_path);
  const auto weights_name = parse_manifest(manifest).metadata.weights_file;
  const Bytes weights = read_file(manifest_path.parent_path() / weights_name);
  return load_model(manifest, weights);
}

void save_model_files(const ModelBundle& bundle, const std::filesystem::path& manifest_path) {
  const SavedModel saved = save_model(bundle);
  write_text_file(manifest_path, saved.manifest);
  write_file(manifest_path.parent_path() / bundle.metadata.weights_file, saved.weights);
}

ModelBundle make_fixture_model(std::uint32_t seed, const ArchitectureDescriptor& descriptor) {
  validate_descriptor(descriptor);
  ModelBundle b;
  b.descriptor = descriptor;
  b.metadata.name = "fixture-seed" + std::to_string(seed);
  b.metadata.version = "1";
  b.metadata.provenance = "fixture: std::mt19937 seed=" + std::to_string(seed) +
                          "; each parameter in blob order = ((u >> 8) * 2^-24 - 0.5) * "
                          "(float)(2 * sqrt(6 / fanIn))";
  b.metadata.weights_file = b.metadata.name + ".weights.bin";
  std::mt19937 gen(seed);
  for_each_param_block(b.descriptor, b.weights, [&](std::span<float> block, std::size_t fan_in) {
    const auto scale = static_cast<float>(2.0 * std::sqrt(6.0 / static_cast<double>(fan_in)));
    for (auto& v : block)
      v = (static_cast<float>(gen() >> 8) * 0x1p-24f - 0.5f) * scale;
  });
  return b;
}

ModelBundle make_zero_model(const ArchitectureDescriptor& descriptor) {
  validate_descriptor(descriptor);
  ModelBundle b;
  b.descriptor = descriptor;
  b.metadata.name = "zero";
  b.metadata.provenance = "fixture: all parameters zero";
  b.metadata.weights_file = "zero.weights.bin";
  for_each_param_block(b.descriptor, b.weights, [](std::span<float> block, std::size_t) {
    std::fill(block.begin(), block.end(), 0.0f);
  });
  return b;
}

Tensor3 make_sample_image(std::uint32_t seed, Shape3 shape) {
  std::mt19937 gen(seed);
  Tensor3 img(shape);
  for (auto& v : img.data()) v = static_cast<float>(gen() >> 24) / 255.0f;
  return img;
}

}  // namespace cnnscope
