#include "cnnscope/engine.hpp"

#include <chrono>

namespace cnnscope {

const Tensor3& InferenceSession::activation(std::string_view layer_name) const {
  return activations.at(model->descriptor.require_layer(layer_name));
}

const Tensor3& InferenceSession::layer_input(std::size_t index) const {
  return index == 0 ? input : activations.at(index - 1);
}

Tensor3 apply_layer(const LayerSpec& layer, const LayerParams& params, const Tensor3& input,
                    ExecutionMode mode) {
  const bool par = mode == ExecutionMode::Parallel;
  switch (layer.kind) {
    case LayerKind::Conv:
      return par ? conv_forward(input, layer, params) : serial::conv_forward(input, layer, params);
    case LayerKind::ReLU:
      return par ? relu_forward(input) : serial::relu_forward(input);
    case LayerKind::MaxPool:
      return par ? maxpool_forward(input, layer.pool.pool_size, layer.pool.stride)
                 : serial::maxpool_forward(input, layer.pool.pool_size, layer.pool.stride);
    case LayerKind::Flatten:
      return flatten_forward(input);
    case LayerKind::Dense:
      return par ? dense_forward(input, layer, params) : serial::dense_forward(input, layer, params);
  }
  throw Error(ErrorKind::Validation, "layer '" + layer.name + "' has an unknown kind");
}

InferenceSession run_forward(std::shared_ptr<const ModelBundle> model, const Tensor3& input,
                             const ForwardOptions& options) {
  if (!model) throw Error(ErrorKind::Model, "no model");
  const auto& desc = model->descriptor;
  if (input.shape() != desc.input_shape) {
    throw Error(ErrorKind::Shape, "input shape " + to_string(input.shape()) +
                                      " does not match model input " +
                                      to_string(desc.input_shape));
  }
  if (model->weights.layers.size() != desc.layers.size())
    throw Error(ErrorKind::Model, "weight store does not cover every layer");

  InferenceSession session;
  session.model = model;
  session.input = input;
  session.activations.reserve(desc.layers.size());
  if (options.layer_seconds) options.layer_seconds->assign(desc.layers.size(), 0.0);

  using Clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < desc.layers.size(); ++i) {
    const auto& layer = desc.layers[i];
    const auto start = Clock::now();
    try {
      session.activations.push_back(
          apply_layer(layer, model->weights.layers[i], session.layer_input(i), options.mode));
    } catch (const Error& e) {
      throw Error(e.kind(), "layer '" + layer.name + "': " + e.what());
    }
    if (options.layer_seconds)
      (*options.layer_seconds)[i] = std::chrono::duration<double>(Clock::now() - start).count();
  }
  const auto out = session.activations.back().data();
  session.logits.assign(out.begin(), out.end());
  session.probabilities = softmax(session.logits);
  return session;
}

}  // namespace cnnscope
