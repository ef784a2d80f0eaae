#include "cnnscope/weights.hpp"

#include <cmath>

namespace cnnscope {

std::span<const float> conv_kernel(const LayerParams& params, const ConvHyper& hyper,
                                   int in_channels, int out_channel, int in_channel) {
  const auto k2 = static_cast<std::size_t>(hyper.kernel_size) *
                  static_cast<std::size_t>(hyper.kernel_size);
  const auto offset = (static_cast<std::size_t>(out_channel) *
                           static_cast<std::size_t>(in_channels) +
                       static_cast<std::size_t>(in_channel)) *
                      k2;
  return std::span<const float>(params.weights).subspan(offset, k2);
}

namespace {

void check_finite(const std::string& layer, std::string_view part, std::span<const float> v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorKind::Validation, "non-finite " + std::string(part) + " in layer '" +
                                             layer + "' at offset " + std::to_string(i));
    }
  }
}

}  // namespace

void validate_weights(const ArchitectureDescriptor& desc, const WeightStore& weights) {
  if (weights.layers.size() != desc.layers.size()) {
    throw Error(ErrorKind::Model, "weight store has " + std::to_string(weights.layers.size()) +
                                      " layer entries, architecture has " +
                                      std::to_string(desc.layers.size()));
  }
  const auto chain = shape_chain(desc);
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    const auto& spec = desc.layers[i];
    const auto& p = weights.layers[i];
    std::size_t want_w = 0;
    std::size_t want_b = 0;
    if (spec.kind == LayerKind::Conv) {
      want_b = static_cast<std::size_t>(spec.conv.out_channels);
      want_w = layer_parameter_count(spec, chain[i]) - want_b;
    } else if (spec.kind == LayerKind::Dense) {
      want_b = static_cast<std::size_t>(spec.dense.out_units);
      want_w = layer_parameter_count(spec, chain[i]) - want_b;
    }
    if (p.weights.size() != want_w || p.bias.size() != want_b) {
      throw Error(ErrorKind::Model, "layer '" + spec.name + "' expects " +
                                        std::to_string(want_w) + " weights and " +
                                        std::to_string(want_b) + " biases, got " +
                                        std::to_string(p.weights.size()) + " and " +
                                        std::to_string(p.bias.size()));
    }
    check_finite(spec.name, "weight", p.weights);
    check_finite(spec.name, "bias", p.bias);
  }
}

void validate_bundle(const ModelBundle& bundle) {
  validate_descriptor(bundle.descriptor);
  validate_weights(bundle.descriptor, bundle.weights);
}

}  // namespace cnnscope
