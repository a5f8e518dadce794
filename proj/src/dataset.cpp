#include "asc/dataset.hpp"

#include "asc/error.hpp"
#include "asc/io.hpp"

#include <charconv>

namespace asc {

std::size_t TokenDataset::total_tokens() const noexcept {
    std::size_t n = 0;
    for (const auto& s : sequences) {
        n += s.size();
    }
    return n;
}

void validate_dataset(const ModelConfig& config, const TokenDataset& data) {
    for (std::size_t i = 0; i < data.sequences.size(); ++i) {
        try {
            validate_sequence(config, data.sequences[i]);
        } catch (const ValidationError& e) {
            throw ValidationError("sequence " + std::to_string(i) + ": " + e.what());
        }
    }
}

TokenDataset parse_dataset(std::string_view text) {
    TokenDataset data;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string_view::npos || line[first] == '#') {
            continue;
        }
        TokenSequence seq;
        std::size_t pos = first;
        while (pos < line.size()) {
            const auto start = line.find_first_not_of(" \t\r", pos);
            if (start == std::string_view::npos) {
                break;
            }
            auto end = line.find_first_of(" \t\r", start);
            if (end == std::string_view::npos) {
                end = line.size();
            }
            int id = 0;
            const auto res = std::from_chars(line.data() + start, line.data() + end, id);
            if (res.ec != std::errc{} || res.ptr != line.data() + end) {
                throw ParseError("bad token id '" + std::string(line.substr(start, end - start)) +
                                     "'",
                                 line_no);
            }
            seq.push_back(id);
            pos = end;
        }
        data.sequences.push_back(std::move(seq));
    }
    return data;
}

std::string format_dataset(const TokenDataset& data) {
    std::string out;
    for (const auto& seq : data.sequences) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (i > 0) {
                out += ' ';
            }
            out += std::to_string(seq[i]);
        }
        out += '\n';
    }
    return out;
}

TokenDataset read_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file_text(path));
}

void write_dataset(const TokenDataset& data, const std::filesystem::path& path) {
    write_file_atomic(path, format_dataset(data));
}

} // namespace asc
