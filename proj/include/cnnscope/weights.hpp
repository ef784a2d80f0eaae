#pragma once

#include <span>
#include <string>
#include <vector>

#include "cnnscope/architecture.hpp"

namespace cnnscope {

/// Parameters of one layer; empty for parameter-free layers.
///
/// Conv: weights laid out [outChannel][inChannel][row][col], one bias per
/// output channel. Dense: weights row-major [outUnit][flatIndex], one bias per
/// output unit.
struct LayerParams {
  std::vector<float> weights;
  std::vector<float> bias;

  bool empty() const { return weights.empty() && bias.empty(); }
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct WeightStore {
  std::vector<LayerParams> layers;  // one entry per descriptor layer
  friend bool operator==(const WeightStore&, const WeightStore&) = default;
};

/// Kernel grid for (out_channel, in_channel) of a conv layer.
std::span<const float> conv_kernel(const LayerParams& params, const ConvHyper& hyper,
                                   int in_channels, int out_channel, int in_channel);

/// Throws Error(Model) for missing/mis-sized parameter arrays and
/// Error(Validation) for non-finite values, naming the layer and offset.
void validate_weights(const ArchitectureDescriptor& desc, const WeightStore& weights);

struct ModelMetadata {
  std::string name = "model";
  std::string version = "1";
  std::string provenance;
  std::string weights_file = "model.weights.bin";
  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

/// Descriptor + weights. Immutable after loading and safe to share across threads.
struct ModelBundle {
  ArchitectureDescriptor descriptor;
  WeightStore weights;
  ModelMetadata metadata;
  friend bool operator==(const ModelBundle&, const ModelBundle&) = default;
};

/// Runs validate_descriptor and validate_weights.
void validate_bundle(const ModelBundle& bundle);

}  // namespace cnnscope
