#pragma once

#include "asc/dataset.hpp"
#include "asc/encoder.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace asc {

// Average per-token cosine similarity between every pair of layer outputs. Index 0 is the
// embedding layer, 1..L the encoder layers.
class SimilarityMatrix {
public:
    // Validates exact symmetry, entries in [-1, 1] and, when token_count > 0, a unit diagonal.
    SimilarityMatrix(std::size_t size, std::vector<double> values, std::size_t token_count);

    static SimilarityMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                      std::size_t token_count);

    std::size_t size() const noexcept { return size_; }
    std::size_t num_encoder_layers() const noexcept { return size_ - 1; }
    std::size_t token_count() const noexcept { return token_count_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * size_ + j]; }
    const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const SimilarityMatrix&, const SimilarityMatrix&) = default;

private:
    std::size_t size_;
    std::vector<double> values_;
    std::size_t token_count_;
};

// Running 64-bit sums of pairwise cosines. Single writer; combine shards with merge().
class SimilarityAccumulator {
public:
    explicit SimilarityAccumulator(std::size_t size);

    std::size_t size() const noexcept { return size_; }
    std::size_t token_count() const noexcept { return count_; }
    // Raw sum for i <= j.
    double sum(std::size_t i, std::size_t j) const { return sums_[i * size_ + j]; }

    void accumulate(const LayerTapFrame& frame);
    void accumulate(std::span<const std::span<const float>> layer_outputs);
    void merge(const SimilarityAccumulator& other);

    // Divides by the token count, mirrors the upper triangle and pins the diagonal to 1.
    SimilarityMatrix finalize() const;

private:
    std::size_t size_;
    std::vector<double> sums_;
    std::size_t count_ = 0;
    std::vector<double> norms_;
};

// Forward pass over every sequence, sharded across `workers` threads by contiguous sequence
// ranges. Shard sums are merged in worker order.
SimilarityMatrix analyze(const ModelConfig& config, const ModelWeights& weights,
                         const TokenDataset& data, std::size_t workers = 1);

// CSV: "# asc-sim v1 layers=<n> tokens=<N>" then n rows of n shortest-round-trip decimals.
std::string to_csv(const SimilarityMatrix& sim);
SimilarityMatrix parse_similarity_csv(std::string_view text);

void write_similarity_csv(const SimilarityMatrix& sim, const std::filesystem::path& path);
SimilarityMatrix read_similarity_csv(const std::filesystem::path& path);

// Hash of the CSV serialisation; equals the hash of a file written by write_similarity_csv.
std::string fingerprint(const SimilarityMatrix& sim);

} // namespace asc
