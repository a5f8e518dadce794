#pragma once

#include "asc/encoder.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace asc {

struct TokenDataset {
    std::vector<TokenSequence> sequences;

    std::size_t total_tokens() const noexcept;

    friend bool operator==(const TokenDataset&, const TokenDataset&) = default;
};

void validate_dataset(const ModelConfig& config, const TokenDataset& data);

// Text format: one sequence per line, whitespace-separated decimal ids. Lines starting with
// '#' and blank lines are skipped.
TokenDataset parse_dataset(std::string_view text);
std::string format_dataset(const TokenDataset& data);

TokenDataset read_dataset(const std::filesystem::path& path);
void write_dataset(const TokenDataset& data, const std::filesystem::path& path);

} // namespace asc
