#include "cnnscope/architecture.hpp"

#include <set>

namespace cnnscope {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::ReLU: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
  }
  return "unknown";
}

std::optional<LayerKind> layer_kind_from_string(std::string_view name) {
  if (name == "conv") return LayerKind::Conv;
  if (name == "relu") return LayerKind::ReLU;
  if (name == "maxpool") return LayerKind::MaxPool;
  if (name == "flatten") return LayerKind::Flatten;
  if (name == "dense") return LayerKind::Dense;
  return std::nullopt;
}

LayerSpec LayerSpec::make_conv(std::string name, ConvHyper hyper, GroupTag group) {
  LayerSpec s;
  s.kind = LayerKind::Conv;
  s.name = std::move(name);
  s.conv = hyper;
  s.group = group;
  return s;
}

LayerSpec LayerSpec::make_relu(std::string name, GroupTag group) {
  LayerSpec s;
  s.kind = LayerKind::ReLU;
  s.name = std::move(name);
  s.group = group;
  return s;
}

LayerSpec LayerSpec::make_maxpool(std::string name, PoolHyper hyper, GroupTag group) {
  LayerSpec s;
  s.kind = LayerKind::MaxPool;
  s.name = std::move(name);
  s.pool = hyper;
  s.group = group;
  return s;
}

LayerSpec LayerSpec::make_flatten(std::string name, GroupTag group) {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  s.name = std::move(name);
  s.group = group;
  return s;
}

LayerSpec LayerSpec::make_dense(std::string name, int out_units, GroupTag group) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.name = std::move(name);
  s.dense.out_units = out_units;
  s.group = group;
  return s;
}

std::optional<std::size_t> ArchitectureDescriptor::find_layer(std::string_view name) const {
  for (std::size_t i = 0; i < layers.size(); ++i)
    if (layers[i].name == name) return i;
  return std::nullopt;
}

std::size_t ArchitectureDescriptor::require_layer(std::string_view name) const {
  if (auto idx = find_layer(name)) return *idx;
  std::string valid;
  for (const auto& l : layers) {
    if (!valid.empty()) valid += ", ";
    valid += l.name;
  }
  throw Error(ErrorKind::Query,
              "unknown layer '" + std::string(name) + "'; valid layers: " + valid);
}

namespace {

[[noreturn]] void shape_fail(const LayerSpec& spec, const std::string& what) {
  throw Error(ErrorKind::Shape, "layer '" + spec.name + "': " + what);
}

int floor_div(int num, int den) {
  // den > 0
  return num >= 0 ? num / den : -((-num + den - 1) / den);
}

}  // namespace

Shape3 output_shape(const Shape3& in, const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::Conv: {
      const auto& c = spec.conv;
      if (c.kernel_size < 1 || c.stride < 1 || c.padding < 0 || c.out_channels < 1)
        shape_fail(spec, "invalid conv hyperparameters");
      const int h = floor_div(in.height + 2 * c.padding - c.kernel_size, c.stride) + 1;
      const int w = floor_div(in.width + 2 * c.padding - c.kernel_size, c.stride) + 1;
      if (h < 1 || w < 1)
        shape_fail(spec, "kernel " + std::to_string(c.kernel_size) + " does not fit input " +
                             to_string(in));
      return {h, w, c.out_channels};
    }
    case LayerKind::ReLU:
      return in;
    case LayerKind::MaxPool: {
      const auto& p = spec.pool;
      if (p.pool_size < 1 || p.stride < 1) shape_fail(spec, "invalid pool hyperparameters");
      if (p.pool_size > in.height || p.pool_size > in.width)
        shape_fail(spec, "pool size " + std::to_string(p.pool_size) + " exceeds input plane " +
                             to_string(in));
      return {(in.height - p.pool_size) / p.stride + 1, (in.width - p.pool_size) / p.stride + 1,
              in.channels};
    }
    case LayerKind::Flatten:
      return {1, 1, static_cast<int>(in.size())};
    case LayerKind::Dense:
      if (spec.dense.out_units < 1) shape_fail(spec, "dense layer needs >= 1 output unit");
      return {1, 1, spec.dense.out_units};
  }
  shape_fail(spec, "unknown layer kind");
}

std::vector<Shape3> shape_chain(const ArchitectureDescriptor& desc) {
  std::vector<Shape3> chain;
  chain.reserve(desc.layers.size() + 1);
  chain.push_back(desc.input_shape);
  for (const auto& layer : desc.layers) chain.push_back(output_shape(chain.back(), layer));
  return chain;
}

void validate_descriptor(const ArchitectureDescriptor& desc) {
  const auto fail = [](const std::string& what) { throw Error(ErrorKind::Validation, what); };
  const auto& in = desc.input_shape;
  if (in.height < 1 || in.width < 1 || in.channels < 1)
    fail("input shape must be positive, got " + to_string(in));
  if (desc.layers.empty()) fail("architecture has no layers");

  std::set<std::string> names;
  bool seen_flatten = false;
  std::set<int> units_with_conv;
  GroupTag prev{0, 0};
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    const auto& l = desc.layers[i];
    if (l.name.empty()) fail("layer " + std::to_string(i) + " has an empty name");
    if (!names.insert(l.name).second) fail("duplicate layer name '" + l.name + "'");
    if (l.group.unit < 0 || l.group.module < 0)
      fail("layer '" + l.name + "' has a negative group tag");
    if (l.group.unit < prev.unit || l.group.module < prev.module)
      fail("group tags must be non-decreasing; layer '" + l.name + "' goes backwards");
    prev = l.group;
    switch (l.kind) {
      case LayerKind::Conv:
        if (seen_flatten) fail("conv layer '" + l.name + "' after flatten");
        if (!units_with_conv.insert(l.group.unit).second)
          fail("unit " + std::to_string(l.group.unit) + " has more than one conv layer");
        break;
      case LayerKind::MaxPool:
        if (seen_flatten) fail("maxpool layer '" + l.name + "' after flatten");
        break;
      case LayerKind::Flatten:
        if (seen_flatten) fail("more than one flatten layer");
        seen_flatten = true;
        break;
      case LayerKind::Dense:
        if (!seen_flatten) fail("dense layer '" + l.name + "' before flatten");
        break;
      case LayerKind::ReLU:
        break;
    }
  }
  if (!seen_flatten) fail("architecture has no flatten layer");
  const auto& last = desc.layers.back();
  if (last.kind != LayerKind::Dense) fail("last layer '" + last.name + "' must be dense");
  if (desc.class_labels.size() != static_cast<std::size_t>(last.dense.out_units))
    fail("class label count " + std::to_string(desc.class_labels.size()) +
         " differs from output units " + std::to_string(last.dense.out_units));

  shape_chain(desc);  // throws Error(Shape) on any non-positive dimension
}

std::size_t layer_parameter_count(const LayerSpec& spec, const Shape3& in) {
  switch (spec.kind) {
    case LayerKind::Conv: {
      const auto k = static_cast<std::size_t>(spec.conv.kernel_size);
      const auto out = static_cast<std::size_t>(spec.conv.out_channels);
      return out * static_cast<std::size_t>(in.channels) * k * k + out;
    }
    case LayerKind::Dense: {
      const auto out = static_cast<std::size_t>(spec.dense.out_units);
      return out * in.size() + out;
    }
    default:
      return 0;
  }
}

std::size_t parameter_count(const ArchitectureDescriptor& desc) {
  const auto chain = shape_chain(desc);
  std::size_t total = 0;
  for (std::size_t i = 0; i < desc.layers.size(); ++i)
    total += layer_parameter_count(desc.layers[i], chain[i]);
  return total;
}

std::size_t flatten_index(const ArchitectureDescriptor& desc) {
  for (std::size_t i = 0; i < desc.layers.size(); ++i)
    if (desc.layers[i].kind == LayerKind::Flatten) return i;
  throw Error(ErrorKind::Validation, "architecture has no flatten layer");
}

ArchitectureDescriptor tiny_vgg_descriptor() {
  const ConvHyper conv{3, 1, 0, 10};
  const PoolHyper pool{2, 2};
  ArchitectureDescriptor d;
  d.input_shape = {64, 64, 3};
  d.layers = {
      LayerSpec::make_conv("conv_1_1", conv, {0, 0}),
      LayerSpec::make_relu("relu_1_1", {0, 0}),
      LayerSpec::make_conv("conv_1_2", conv, {1, 0}),
      LayerSpec::make_relu("relu_1_2", {1, 0}),
      LayerSpec::make_maxpool("max_pool_1", pool, {1, 0}),
      LayerSpec::make_conv("conv_2_1", conv, {2, 1}),
      LayerSpec::make_relu("relu_2_1", {2, 1}),
      LayerSpec::make_conv("conv_2_2", conv, {3, 1}),
      LayerSpec::make_relu("relu_2_2", {3, 1}),
      LayerSpec::make_maxpool("max_pool_2", pool, {3, 1}),
      LayerSpec::make_flatten("flatten", {4, 2}),
      LayerSpec::make_dense("output", 10, {4, 2}),
  };
  d.class_labels = {"lifeboat",    "ladybug", "pizza",    "bell pepper", "school bus",
                    "koala",       "espresso", "red panda", "orange",     "sport car"};
  return d;
}

}  // namespace cnnscope
