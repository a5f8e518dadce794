#pragma once

#include "asc/dataset.hpp"
#include "asc/model.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace asc {

struct SynthSpec {
    std::size_t num_layers = 6;
    std::size_t hidden_dim = 32;
    std::size_t num_heads = 4;
    std::size_t ffn_dim = 64;
    std::size_t vocab_size = 100;
    std::size_t max_seq_len = 64;
    std::set<int> identity_layers; // 1-based
    std::uint64_t seed = 0;
    // Every non-identity layer must bring the mean input/output token cosine below this
    // on the probe batch.
    double max_layer_cosine = 0.8;
    int max_attempts = 10;
};

struct SynthModel {
    Model model;
    // Measured mean cosine between each layer's input and output on the probe batch
    // (exactly 1 for identity layers).
    std::vector<double> layer_cosines;
};

// norm_mode = none. Identity layers get zero value, output and FFN projections with zero
// biases and pass their input through exactly. Other layers get seeded random weights whose
// scale doubles per attempt until the probe cosine drops below max_layer_cosine; after
// max_attempts the generator throws.
SynthModel gen_model(const SynthSpec& spec);

Model gen_model(std::size_t num_layers, std::size_t hidden_dim, std::size_t num_heads,
                std::size_t ffn_dim, std::size_t vocab_size, const std::set<int>& identity_layers,
                std::uint64_t seed);

// Uniform random ids and lengths in [min_len, max_len].
TokenDataset gen_dataset(std::size_t num_sequences, std::size_t min_len, std::size_t max_len,
                         std::size_t vocab_size, std::uint64_t seed);

} // namespace asc
