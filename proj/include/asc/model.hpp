#pragma once

#include "asc/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace asc {

enum class NormMode { standard, none };

std::string_view to_string(NormMode mode);
NormMode norm_mode_from_string(std::string_view s);

struct ModelConfig {
    std::size_t vocab_size = 0;
    // Encoder layers only; the embedding layer is not counted. Zero is legal for a model whose
    // encoder stack was pruned away entirely.
    std::size_t num_layers = 0;
    std::size_t hidden_dim = 0;
    std::size_t num_heads = 0;
    std::size_t ffn_dim = 0;
    std::size_t max_seq_len = 0;
    NormMode norm_mode = NormMode::standard;
    float layer_norm_eps = kDefaultLayerNormEps;
    // Original 1-based encoder index of each surviving layer, strictly increasing.
    std::vector<int> layer_ids;

    std::size_t head_dim() const noexcept { return num_heads ? hidden_dim / num_heads : 0; }

    // Throws ValidationError describing the first violated invariant.
    void validate() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Identity provenance [1..num_layers].
std::vector<int> identity_layer_ids(std::size_t num_layers);

struct LayerWeights {
    Tensor wq, bq;
    Tensor wk, bk;
    Tensor wv, bv;
    Tensor wo, bo;
    Tensor w1, b1;
    Tensor w2, b2;
    Tensor ln1_g, ln1_b;
    Tensor ln2_g, ln2_b;

    friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct ModelWeights {
    Tensor token_embedding;    // vocab_size x d
    Tensor position_embedding; // max_seq_len x d
    std::vector<LayerWeights> layers;

    friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

struct Model {
    ModelConfig config;
    ModelWeights weights;
};

// Zero-initialised weights with correct shapes; layernorm gammas set to one.
ModelWeights zero_weights(const ModelConfig& config);
LayerWeights zero_layer(const ModelConfig& config);

// Canonical tensor names, in payload order.
struct NamedTensorRef {
    std::string name;
    const Tensor* tensor;
};
struct NamedTensorMut {
    std::string name;
    Tensor* tensor;
};
std::vector<NamedTensorRef> named_tensors(const ModelWeights& weights);
std::vector<NamedTensorMut> named_tensors(ModelWeights& weights);
std::vector<NamedTensorRef> named_tensors(const LayerWeights& layer, std::size_t index);

// Expected shape for every canonical name under `config`, in payload order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> canonical_layout(
    const ModelConfig& config);

// Checks config invariants, tensor shapes against the config, and finiteness.
void validate_model(const ModelConfig& config, const ModelWeights& weights);

inline constexpr std::string_view kModelMagic = "ASCMODL1";
inline constexpr int kModelFormatVersion = 1;

// Serialise to the container format: 8-byte magic, u32 LE header length, JSON header,
// then little-endian f32 payload with every tensor at an 8-byte aligned offset.
std::vector<std::uint8_t> serialize_model(const ModelConfig& config, const ModelWeights& weights);
Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ModelConfig& config, const ModelWeights& weights,
                const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

} // namespace asc
