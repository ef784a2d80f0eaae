#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cnnscope/tensor.hpp"

namespace cnnscope {

enum class LayerKind { Conv, ReLU, MaxPool, Flatten, Dense };

std::string_view to_string(LayerKind kind);
/// Accepts the lower-case manifest spellings ("conv", "relu", "maxpool", "flatten", "dense").
std::optional<LayerKind> layer_kind_from_string(std::string_view name);

struct ConvHyper {
  int kernel_size = 3;
  int stride = 1;
  int padding = 0;
  int out_channels = 1;
  friend bool operator==(const ConvHyper&, const ConvHyper&) = default;
};

struct PoolHyper {
  int pool_size = 2;
  int stride = 2;
  friend bool operator==(const PoolHyper&, const PoolHyper&) = default;
};

struct DenseHyper {
  int out_units = 1;
  friend bool operator==(const DenseHyper&, const DenseHyper&) = default;
};

/// Colormap grouping: a unit holds at most one conv layer, modules group units.
struct GroupTag {
  int unit = 0;
  int module = 0;
  friend bool operator==(const GroupTag&, const GroupTag&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::string name;
  ConvHyper conv{};    // Conv only
  PoolHyper pool{};    // MaxPool only
  DenseHyper dense{};  // Dense only
  GroupTag group{};

  static LayerSpec make_conv(std::string name, ConvHyper hyper, GroupTag group);
  static LayerSpec make_relu(std::string name, GroupTag group);
  static LayerSpec make_maxpool(std::string name, PoolHyper hyper, GroupTag group);
  static LayerSpec make_flatten(std::string name, GroupTag group);
  static LayerSpec make_dense(std::string name, int out_units, GroupTag group);

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ArchitectureDescriptor {
  Shape3 input_shape{};
  std::vector<LayerSpec> layers;
  std::vector<std::string> class_labels;

  /// Index of the layer with this name, if any.
  std::optional<std::size_t> find_layer(std::string_view name) const;
  /// Like find_layer but throws Error(Query) listing valid names.
  std::size_t require_layer(std::string_view name) const;

  friend bool operator==(const ArchitectureDescriptor&, const ArchitectureDescriptor&) = default;
};

/// Output shape of one layer. Throws Error(Shape) naming the layer when a
/// dimension would be non-positive or the layer is not applicable.
Shape3 output_shape(const Shape3& in, const LayerSpec& spec);

/// Input shape of every layer followed by the final output: layers.size() + 1 entries.
std::vector<Shape3> shape_chain(const ArchitectureDescriptor& desc);

/// Checks the chain, grouping and label invariants. Throws Error(Validation)
/// or Error(Shape).
void validate_descriptor(const ArchitectureDescriptor& desc);

/// Number of weights + biases for layer `index` given its input shape.
std::size_t layer_parameter_count(const LayerSpec& spec, const Shape3& in);
std::size_t parameter_count(const ArchitectureDescriptor& desc);

/// Index of the single Flatten layer. Throws Error(Validation) if absent.
std::size_t flatten_index(const ArchitectureDescriptor& desc);

/// Two blocks of (conv-relu, conv-relu, maxpool) with 10 filters per conv on
/// 64x64x3 inputs, then flatten and a 10-way dense output.
ArchitectureDescriptor tiny_vgg_descriptor();

}  // namespace cnnscope
