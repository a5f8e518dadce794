#include "asc/surgery.hpp"

#include "asc/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace asc {

SurgeryResult apply_plan(const ModelConfig& config, const ModelWeights& weights,
                         const PrunePlan& plan) {
    validate_model(config, weights);
    validate_plan(plan);
    const int num_layers = static_cast<int>(config.num_layers);
    for (int idx : plan.redundant_layers) {
        if (idx < 1 || idx > num_layers) {
            throw ValidationError("plan removes layer " + std::to_string(idx) +
                                  " but the model has layers 1.." + std::to_string(num_layers));
        }
    }
    for (const auto& a : plan.anchors) {
        if (a.to > num_layers) {
            throw ValidationError("plan anchor (" + std::to_string(a.from) + "," +
                                  std::to_string(a.to) + ") exceeds model depth " +
                                  std::to_string(num_layers));
        }
    }

    SurgeryResult result;
    ModelConfig& out_cfg = result.model.config;
    ModelWeights& out_w = result.model.weights;
    out_cfg = config;
    out_cfg.layer_ids.clear();
    out_w.token_embedding = weights.token_embedding;
    out_w.position_embedding = weights.position_embedding;

    for (int pos = 1; pos <= num_layers; ++pos) {
        const int original = config.layer_ids[static_cast<std::size_t>(pos - 1)];
        if (std::binary_search(plan.redundant_layers.begin(), plan.redundant_layers.end(), pos)) {
            result.removed_layer_ids.push_back(original);
            continue;
        }
        out_w.layers.push_back(weights.layers[static_cast<std::size_t>(pos - 1)]);
        out_cfg.layer_ids.push_back(original);
    }
    out_cfg.num_layers = out_w.layers.size();
    result.embedding_only = out_cfg.num_layers == 0;
    validate_model(out_cfg, out_w);
    return result;
}

DivergenceReport compare_models(const ModelConfig& config_a, const ModelWeights& weights_a,
                                const ModelConfig& config_b, const ModelWeights& weights_b,
                                const TokenDataset& data, std::size_t workers) {
    if (config_a.hidden_dim != config_b.hidden_dim) {
        throw ValidationError("cannot compare models with hidden_dim " +
                              std::to_string(config_a.hidden_dim) + " and " +
                              std::to_string(config_b.hidden_dim));
    }
    validate_dataset(config_a, data);
    validate_dataset(config_b, data);
    if (data.total_tokens() == 0) {
        throw ValidationError("cannot compare models on an empty dataset");
    }

    struct Partial {
        std::size_t tokens = 0;
        double cos_sum = 0.0;
        double cos_min = std::numeric_limits<double>::infinity();
        double max_diff = 0.0;
    };

    const std::size_t nseq = data.sequences.size();
    workers = std::clamp<std::size_t>(workers, 1, nseq);
    std::vector<Partial> parts(workers);
    std::vector<std::exception_ptr> errors(workers);
    auto run_shard = [&](std::size_t w) {
        try {
            Partial& p = parts[w];
            for (std::size_t s = nseq * w / workers; s < nseq * (w + 1) / workers; ++s) {
                const Tensor ya = forward(config_a, weights_a, data.sequences[s]);
                const Tensor yb = forward(config_b, weights_b, data.sequences[s]);
                for (std::size_t t = 0; t < ya.rows(); ++t) {
                    const auto ra = ya.row(t);
                    const auto rb = yb.row(t);
                    const double c = cosine(ra, rb);
                    p.cos_sum += c;
                    p.cos_min = std::min(p.cos_min, c);
                    for (std::size_t k = 0; k < ra.size(); ++k) {
                        p.max_diff = std::max(
                            p.max_diff, std::abs(static_cast<double>(ra[k]) - rb[k]));
                    }
                    ++p.tokens;
                }
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        run_shard(0);
    } else {
        std::vector<std::jthread> threads;
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back(run_shard, w);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    Partial total;
    for (const auto& p : parts) {
        total.tokens += p.tokens;
        total.cos_sum += p.cos_sum;
        total.cos_min = std::min(total.cos_min, p.cos_min);
        total.max_diff = std::max(total.max_diff, p.max_diff);
    }
    DivergenceReport r;
    r.token_count = total.tokens;
    r.mean_cosine = total.cos_sum / static_cast<double>(total.tokens);
    r.min_cosine = total.cos_min;
    r.max_abs_diff = total.max_diff;
    return r;
}

} // namespace asc
