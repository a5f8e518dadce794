#include "asc/synth.hpp"

#include "asc/encoder.hpp"
#include "asc/error.hpp"
#include "asc/io.hpp"
#include "asc/rng.hpp"

#include <algorithm>
#include <cmath>

namespace asc {

namespace {

constexpr std::uint64_t kProbeTag = 0x70726f6265ULL;
constexpr std::uint64_t kEmbedTag = 0x656d626564ULL;
constexpr std::size_t kProbeSequences = 8;
constexpr std::size_t kProbeLength = 16;

void fill_normal(Tensor& t, Rng& rng, double stddev) {
    for (float& v : t.data()) {
        v = static_cast<float>(rng.normal() * stddev);
    }
}

LayerWeights random_layer(const ModelConfig& c, Rng& rng, double scale) {
    const double d = static_cast<double>(c.hidden_dim);
    const double f = static_cast<double>(c.ffn_dim);
    LayerWeights l = zero_layer(c);
    fill_normal(l.wq, rng, 1.0 / std::sqrt(d));
    fill_normal(l.bq, rng, 0.02);
    fill_normal(l.wk, rng, 1.0 / std::sqrt(d));
    fill_normal(l.bk, rng, 0.02);
    fill_normal(l.wv, rng, scale / std::sqrt(d));
    fill_normal(l.bv, rng, 0.02 * scale);
    fill_normal(l.wo, rng, scale / std::sqrt(d));
    fill_normal(l.bo, rng, 0.02 * scale);
    fill_normal(l.w1, rng, scale / std::sqrt(d));
    fill_normal(l.b1, rng, 0.02 * scale);
    fill_normal(l.w2, rng, scale / std::sqrt(f));
    fill_normal(l.b2, rng, 0.02 * scale);
    return l;
}

double mean_token_cosine(const std::vector<Tensor>& in, const std::vector<Tensor>& out) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < in.size(); ++s) {
        for (std::size_t t = 0; t < in[s].rows(); ++t) {
            sum += cosine(in[s].row(t), out[s].row(t));
            ++n;
        }
    }
    return sum / static_cast<double>(n);
}

} // namespace

SynthModel gen_model(const SynthSpec& spec) {
    ModelConfig c;
    c.vocab_size = spec.vocab_size;
    c.num_layers = spec.num_layers;
    c.hidden_dim = spec.hidden_dim;
    c.num_heads = spec.num_heads;
    c.ffn_dim = spec.ffn_dim;
    c.max_seq_len = spec.max_seq_len;
    c.norm_mode = NormMode::none;
    c.layer_ids = identity_layer_ids(spec.num_layers);
    c.validate();
    if (spec.num_layers == 0) {
        throw ValidationError("synthetic models need at least one encoder layer");
    }
    for (int k : spec.identity_layers) {
        if (k < 1 || static_cast<std::size_t>(k) > spec.num_layers) {
            throw ValidationError("identity layer " + std::to_string(k) + " outside 1.." +
                                  std::to_string(spec.num_layers));
        }
    }
    if (spec.max_attempts < 1) {
        throw ValidationError("max_attempts must be positive");
    }

    SynthModel result;
    result.model.config = c;
    ModelWeights& w = result.model.weights;
    w = zero_weights(c);
    {
        Rng rng(derive_seed(spec.seed, kEmbedTag));
        fill_normal(w.token_embedding, rng, 1.0);
        fill_normal(w.position_embedding, rng, 0.5);
    }

    const TokenDataset probe =
        gen_dataset(kProbeSequences, std::min(kProbeLength, c.max_seq_len),
                    std::min(kProbeLength, c.max_seq_len), c.vocab_size,
                    derive_seed(spec.seed, kProbeTag));
    std::vector<Tensor> states;
    for (const auto& seq : probe.sequences) {
        states.push_back(embed(c, w, seq));
    }

    for (std::size_t k = 1; k <= c.num_layers; ++k) {
        LayerWeights& slot = w.layers[k - 1];
        if (spec.identity_layers.count(static_cast<int>(k))) {
            // zero_weights already left Wv, Wo, W1, W2 and every bias at zero.
            result.layer_cosines.push_back(1.0);
            continue;
        }
        bool accepted = false;
        double scale = 1.0;
        for (int attempt = 0; attempt < spec.max_attempts; ++attempt, scale *= 2.0) {
            Rng rng(derive_seed(spec.seed, 1000 * k + static_cast<std::uint64_t>(attempt)));
            LayerWeights candidate = random_layer(c, rng, scale);
            std::vector<Tensor> next;
            next.reserve(states.size());
            for (const auto& x : states) {
                next.push_back(encoder_layer(c, candidate, x));
            }
            const bool finite = std::all_of(next.begin(), next.end(),
                                            [](const Tensor& t) { return t.all_finite(); });
            const double cos = mean_token_cosine(states, next);
            if (finite && cos < spec.max_layer_cosine) {
                slot = std::move(candidate);
                states = std::move(next);
                result.layer_cosines.push_back(cos);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw Error("synthetic layer " + std::to_string(k) + " did not reach probe cosine < " +
                        format_double(spec.max_layer_cosine) + " within " +
                        std::to_string(spec.max_attempts) + " attempts");
        }
    }
    validate_model(result.model.config, result.model.weights);
    return result;
}

Model gen_model(std::size_t num_layers, std::size_t hidden_dim, std::size_t num_heads,
                std::size_t ffn_dim, std::size_t vocab_size, const std::set<int>& identity_layers,
                std::uint64_t seed) {
    SynthSpec spec;
    spec.num_layers = num_layers;
    spec.hidden_dim = hidden_dim;
    spec.num_heads = num_heads;
    spec.ffn_dim = ffn_dim;
    spec.vocab_size = vocab_size;
    spec.identity_layers = identity_layers;
    spec.seed = seed;
    return gen_model(spec).model;
}

TokenDataset gen_dataset(std::size_t num_sequences, std::size_t min_len, std::size_t max_len,
                         std::size_t vocab_size, std::uint64_t seed) {
    if (min_len < 1 || min_len > max_len) {
        throw ValidationError("dataset lengths need 1 <= min_len <= max_len, got " +
                              std::to_string(min_len) + ".." + std::to_string(max_len));
    }
    if (vocab_size == 0) {
        throw ValidationError("vocab_size must be positive");
    }
    Rng rng(seed);
    TokenDataset data;
    data.sequences.reserve(num_sequences);
    for (std::size_t s = 0; s < num_sequences; ++s) {
        const std::size_t len = min_len + static_cast<std::size_t>(rng.below(max_len - min_len + 1));
        TokenSequence seq(len);
        for (auto& id : seq) {
            id = static_cast<int>(rng.below(vocab_size));
        }
        data.sequences.push_back(std::move(seq));
    }
    return data;
}

} // namespace asc
