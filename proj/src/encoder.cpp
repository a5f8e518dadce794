#include "asc/encoder.hpp"

#include "asc/error.hpp"

#include <cmath>

namespace asc {

void validate_sequence(const ModelConfig& config, std::span<const int> seq) {
    if (seq.empty()) {
        throw ValidationError("token sequence is empty");
    }
    if (seq.size() > config.max_seq_len) {
        throw ValidationError("sequence length " + std::to_string(seq.size()) +
                              " exceeds max_seq_len " + std::to_string(config.max_seq_len));
    }
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (seq[t] < 0 || static_cast<std::size_t>(seq[t]) >= config.vocab_size) {
            throw ValidationError("token id " + std::to_string(seq[t]) + " at position " +
                                  std::to_string(t) + " outside vocabulary of size " +
                                  std::to_string(config.vocab_size));
        }
    }
}

Tensor embed(const ModelConfig& config, const ModelWeights& weights, std::span<const int> seq) {
    validate_sequence(config, seq);
    const std::size_t d = config.hidden_dim;
    Tensor x({seq.size(), d});
    for (std::size_t t = 0; t < seq.size(); ++t) {
        const auto tok = weights.token_embedding.row(static_cast<std::size_t>(seq[t]));
        const auto pos = weights.position_embedding.row(t);
        auto out = x.row(t);
        for (std::size_t j = 0; j < d; ++j) {
            out[j] = tok[j] + pos[j];
        }
    }
    if (config.norm_mode == NormMode::standard) {
        // The container has no embedding norm parameters: unit gamma, zero beta.
        return layernorm(x, config.layer_norm_eps);
    }
    return x;
}

Tensor multi_head_attention(const ModelConfig& config, const LayerWeights& layer, const Tensor& x) {
    const std::size_t n = x.rows();
    const std::size_t heads = config.num_heads;
    const std::size_t hd = config.head_dim();
    const Tensor q = linear(x, layer.wq, layer.bq);
    const Tensor k = linear(x, layer.wk, layer.bk);
    const Tensor v = linear(x, layer.wv, layer.bv);
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    Tensor context({n, config.hidden_dim});
    Tensor scores({n, n});
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * hd;
        for (std::size_t i = 0; i < n; ++i) {
            const auto qi = q.row(i).subspan(off, hd);
            for (std::size_t j = 0; j < n; ++j) {
                scores.at(i, j) = static_cast<float>(dot(qi, k.row(j).subspan(off, hd)) * scale);
            }
        }
        const Tensor probs = softmax_rows(scores);
        for (std::size_t i = 0; i < n; ++i) {
            auto out = context.row(i).subspan(off, hd);
            for (std::size_t c = 0; c < hd; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    acc += static_cast<double>(probs.at(i, j)) *
                           static_cast<double>(v.at(j, off + c));
                }
                out[c] = static_cast<float>(acc);
            }
        }
    }
    return linear(context, layer.wo, layer.bo);
}

Tensor feed_forward(const LayerWeights& layer, const Tensor& x) {
    return linear(gelu(linear(x, layer.w1, layer.b1)), layer.w2, layer.b2);
}

Tensor encoder_layer(const ModelConfig& config, const LayerWeights& layer, const Tensor& x) {
    const bool norm = config.norm_mode == NormMode::standard;
    Tensor y1 = add(x, multi_head_attention(config, layer, x));
    if (norm) {
        y1 = layernorm(y1, layer.ln1_g, layer.ln1_b, config.layer_norm_eps);
    }
    Tensor y = add(y1, feed_forward(layer, y1));
    if (norm) {
        y = layernorm(y, layer.ln2_g, layer.ln2_b, config.layer_norm_eps);
    }
    return y;
}

std::vector<Tensor> forward_hidden_states(const ModelConfig& config, const ModelWeights& weights,
                                          std::span<const int> seq) {
    if (weights.layers.size() != config.num_layers) {
        throw ValidationError("model has " + std::to_string(weights.layers.size()) +
                              " layers but config declares " + std::to_string(config.num_layers));
    }
    std::vector<Tensor> states;
    states.reserve(config.num_layers + 1);
    states.push_back(embed(config, weights, seq));
    for (const auto& layer : weights.layers) {
        states.push_back(encoder_layer(config, layer, states.back()));
    }
    return states;
}

Tensor forward(const ModelConfig& config, const ModelWeights& weights, std::span<const int> seq) {
    auto states = forward_hidden_states(config, weights, seq);
    return std::move(states.back());
}

void forward_with_taps(const ModelConfig& config, const ModelWeights& weights,
                       std::span<const int> seq, const TapVisitor& visit) {
    const auto states = forward_hidden_states(config, weights, seq);
    LayerTapFrame frame;
    frame.layer_outputs.resize(states.size());
    for (std::size_t t = 0; t < seq.size(); ++t) {
        frame.token_index = t;
        for (std::size_t k = 0; k < states.size(); ++k) {
            frame.layer_outputs[k] = states[k].row(t);
        }
        visit(frame);
    }
}

} // namespace asc
