#pragma once

// Test-only reference for the redundant-layer scan. It follows the published pseudocode line
// by line: 1-based indices, the outer index reassigned inside the loop, and a break out of a
// descending inner loop. It shares no code with asc::plan().

#include "asc/similarity.hpp"

#include <set>
#include <stdexcept>

namespace asc::testing {

inline std::set<int> replay_oracle(const SimilarityMatrix& Sim, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("threshold out of range");
    }
    const int number_of_layers = static_cast<int>(Sim.size());
    auto at = [&](int i, int j) { return Sim(static_cast<std::size_t>(i - 1),
                                             static_cast<std::size_t>(j - 1)); };
    std::set<int> redundant;
    int i = 1;
    while (i <= number_of_layers) {
        int j = number_of_layers;
        for (; j >= i; j = j - 1) {
            if (at(i, j) >= threshold) {
                break;
            }
        }
        if (j < i) {
            throw std::invalid_argument("diagonal below threshold; matrix is not unit-diagonal");
        }
        if (j > i) {
            for (int layer = i + 1; layer <= j; layer = layer + 1) {
                // 1-based row `layer` of the matrix is encoder layer `layer - 1`.
                redundant.insert(layer - 1);
            }
        }
        i = j + 1;
    }
    return redundant;
}

} // namespace asc::testing
