#pragma once

#include "asc/dataset.hpp"
#include "asc/model.hpp"
#include "asc/planner.hpp"

namespace asc {

struct SurgeryResult {
    Model model;
    std::vector<int> removed_layer_ids; // original ids of the pruned layers
    bool embedding_only = false;        // every encoder layer was removed
};

// Drops the plan's redundant layers (1-based positions in the current stack) and renumbers
// the survivors from 0. Surviving tensors are copied bit-exactly; layer_ids keeps provenance.
SurgeryResult apply_plan(const ModelConfig& config, const ModelWeights& weights,
                         const PrunePlan& plan);

struct DivergenceReport {
    std::size_t token_count = 0;
    double mean_cosine = 0.0;
    double min_cosine = 0.0;
    double max_abs_diff = 0.0;
};

// Per-token comparison of the two models' final-layer outputs.
DivergenceReport compare_models(const ModelConfig& config_a, const ModelWeights& weights_a,
                                const ModelConfig& config_b, const ModelWeights& weights_b,
                                const TokenDataset& data, std::size_t workers = 1);

} // namespace asc
