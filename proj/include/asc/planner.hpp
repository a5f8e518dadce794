#pragma once

#include "asc/similarity.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace asc {

enum class PlanMode { asc, random };

// Anchor (i, j): encoder layers i+1..j are redundant because sim(i, j) >= threshold.
struct Anchor {
    int from = 0;
    int to = 0;

    friend bool operator==(const Anchor&, const Anchor&) = default;
};

struct PrunePlan {
    PlanMode mode = PlanMode::asc;
    double threshold = 0.0; // 0 marks a random plan
    std::vector<int> redundant_layers; // sorted, 1-based matrix indices
    std::vector<Anchor> anchors;
    std::string matrix_fingerprint; // empty for random plans
    std::optional<std::uint64_t> seed;

    friend bool operator==(const PrunePlan&, const PrunePlan&) = default;
};

// Checks the structural invariants: anchors ordered and disjoint, redundant set equals the
// union of anchor blocks (asc mode), indices positive and sorted.
void validate_plan(const PrunePlan& plan);

// Farthest-first greedy scan. Starting at i = 0, find the largest j >= i with
// sim(i, j) >= threshold; if j > i the block i+1..j is redundant. Continue from i = j + 1.
PrunePlan plan(const SimilarityMatrix& sim, double threshold);

// Uniformly random `count`-subset of 1..num_layers (partial Fisher-Yates over Rng).
PrunePlan plan_random(std::size_t num_layers, std::size_t count, std::uint64_t seed);

std::string plan_to_json(const PrunePlan& plan);
PrunePlan plan_from_json(std::string_view text);

void write_plan(const PrunePlan& plan, const std::filesystem::path& path);
PrunePlan read_plan(const std::filesystem::path& path);

} // namespace asc
