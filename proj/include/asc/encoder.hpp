#pragma once

#include "asc/model.hpp"

#include <functional>
#include <span>
#include <vector>

namespace asc {

using TokenSequence = std::vector<int>;

// Throws ValidationError unless `seq` is non-empty, fits max_seq_len and every id is in range.
void validate_sequence(const ModelConfig& config, std::span<const int> seq);

// Output embedding of every layer for one token position. layer_outputs[0] is the embedding
// layer, layer_outputs[k] the k-th encoder layer. The spans view hidden states owned by the
// caller of the visitor and are only valid during the callback.
struct LayerTapFrame {
    std::size_t token_index = 0;
    std::vector<std::span<const float>> layer_outputs;
};

Tensor embed(const ModelConfig& config, const ModelWeights& weights, std::span<const int> seq);

Tensor multi_head_attention(const ModelConfig& config, const LayerWeights& layer, const Tensor& x);
Tensor feed_forward(const LayerWeights& layer, const Tensor& x);

// Post-norm block: y1 = LN1(x + MHA(x)); y = LN2(y1 + FFN(y1)). Norms are skipped when
// norm_mode is none.
Tensor encoder_layer(const ModelConfig& config, const LayerWeights& layer, const Tensor& x);

// Hidden state after each layer: L+1 tensors of shape n x d, index 0 being the embedding.
std::vector<Tensor> forward_hidden_states(const ModelConfig& config, const ModelWeights& weights,
                                          std::span<const int> seq);

// Final-layer output (the embedding output when the model has no encoder layers).
Tensor forward(const ModelConfig& config, const ModelWeights& weights, std::span<const int> seq);

using TapVisitor = std::function<void(const LayerTapFrame&)>;

// Runs the stack once and calls `visit` for each token position in order.
void forward_with_taps(const ModelConfig& config, const ModelWeights& weights,
                       std::span<const int> seq, const TapVisitor& visit);

} // namespace asc
