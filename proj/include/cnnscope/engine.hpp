#pragma once

#include <memory>
#include <vector>

#include "cnnscope/kernels.hpp"
#include "cnnscope/weights.hpp"

namespace cnnscope {

enum class ExecutionMode { Parallel, Serial };

struct ForwardOptions {
  ExecutionMode mode = ExecutionMode::Parallel;
  /// When non-null, receives the wall-clock seconds spent in each layer.
  std::vector<double>* layer_seconds = nullptr;
};

/// One complete forward pass with every layer's output retained.
///
/// activations[i] is the output of descriptor layer i; the flatten output is a
/// 1x1xN tensor and the final dense output holds the logits.
struct InferenceSession {
  std::shared_ptr<const ModelBundle> model;
  Tensor3 input;
  std::vector<Tensor3> activations;
  std::vector<float> logits;
  std::vector<float> probabilities;

  const Tensor3& activation(std::string_view layer_name) const;
  /// Input of layer `index`: the session input for layer 0, else the previous activation.
  const Tensor3& layer_input(std::size_t index) const;
  std::size_t predicted_class() const { return argmax(probabilities); }
};

/// Throws Error(Shape) if the input shape differs from the descriptor. Layer
/// failures are rethrown with the layer name prefixed.
InferenceSession run_forward(std::shared_ptr<const ModelBundle> model, const Tensor3& input,
                             const ForwardOptions& options = {});

/// Applies a single layer using the chosen execution mode.
Tensor3 apply_layer(const LayerSpec& layer, const LayerParams& params, const Tensor3& input,
                    ExecutionMode mode = ExecutionMode::Parallel);

}  // namespace cnnscope
