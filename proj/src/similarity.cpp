#include "asc/similarity.hpp"

#include "asc/error.hpp"
#include "asc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <thread>

namespace asc {

SimilarityMatrix::SimilarityMatrix(std::size_t size, std::vector<double> values,
                                   std::size_t token_count)
    : size_(size), values_(std::move(values)), token_count_(token_count) {
    if (size_ < 1) {
        throw ValidationError("similarity matrix must have at least one layer");
    }
    if (values_.size() != size_ * size_) {
        throw DimensionError("similarity matrix of size " + std::to_string(size_) + " needs " +
                             std::to_string(size_ * size_) + " values, got " +
                             std::to_string(values_.size()));
    }
    for (std::size_t i = 0; i < size_; ++i) {
        for (std::size_t j = 0; j < size_; ++j) {
            const double v = (*this)(i, j);
            if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
                throw ValidationError("similarity entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") = " + format_double(v) +
                                      " outside [-1, 1]");
            }
            if (v != (*this)(j, i)) {
                throw ValidationError("similarity matrix is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
        if (token_count_ > 0 && (*this)(i, i) != 1.0) {
            throw ValidationError("similarity diagonal entry " + std::to_string(i) +
                                  " is not exactly 1");
        }
    }
}

SimilarityMatrix SimilarityMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                             std::size_t token_count) {
    std::vector<double> flat;
    flat.reserve(rows.size() * rows.size());
    for (const auto& r : rows) {
        if (r.size() != rows.size()) {
            throw DimensionError("similarity rows must form a square matrix");
        }
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return SimilarityMatrix(rows.size(), std::move(flat), token_count);
}

SimilarityAccumulator::SimilarityAccumulator(std::size_t size)
    : size_(size), sums_(size * size, 0.0), norms_(size, 0.0) {
    if (size < 2) {
        throw ValidationError("similarity accumulator needs at least 2 layers (embedding plus "
                              "one encoder layer), got " +
                              std::to_string(size));
    }
}

void SimilarityAccumulator::accumulate(const LayerTapFrame& frame) {
    accumulate(frame.layer_outputs);
}

void SimilarityAccumulator::accumulate(std::span<const std::span<const float>> outputs) {
    if (outputs.size() != size_) {
        throw ValidationError("tap frame has " + std::to_string(outputs.size()) +
                              " layer outputs, accumulator expects " + std::to_string(size_));
    }
    for (std::size_t i = 0; i < size_; ++i) {
        if (outputs[i].size() != outputs[0].size()) {
            throw DimensionError("tap frame layer outputs have unequal lengths");
        }
        norms_[i] = l2_norm(outputs[i]);
    }
    for (std::size_t i = 0; i < size_; ++i) {
        for (std::size_t j = i; j < size_; ++j) {
            sums_[i * size_ + j] +=
                cosine_from_parts(dot(outputs[i], outputs[j]), norms_[i], norms_[j]);
        }
    }
    ++count_;
}

void SimilarityAccumulator::merge(const SimilarityAccumulator& other) {
    if (other.size_ != size_) {
        throw ValidationError("cannot merge accumulators of sizes " + std::to_string(size_) +
                              " and " + std::to_string(other.size_));
    }
    for (std::size_t k = 0; k < sums_.size(); ++k) {
        sums_[k] += other.sums_[k];
    }
    count_ += other.count_;
}

SimilarityMatrix SimilarityAccumulator::finalize() const {
    if (count_ == 0) {
        throw ValidationError("no tokens accumulated; the dataset is empty");
    }
    const double n = static_cast<double>(count_);
    std::vector<double> values(size_ * size_);
    for (std::size_t i = 0; i < size_; ++i) {
        values[i * size_ + i] = 1.0;
        for (std::size_t j = i + 1; j < size_; ++j) {
            const double v = std::clamp(sums_[i * size_ + j] / n, -1.0, 1.0);
            values[i * size_ + j] = v;
            values[j * size_ + i] = v;
        }
    }
    return SimilarityMatrix(size_, std::move(values), count_);
}

SimilarityMatrix analyze(const ModelConfig& config, const ModelWeights& weights,
                         const TokenDataset& data, std::size_t workers) {
    validate_model(config, weights);
    validate_dataset(config, data);
    const std::size_t total = data.total_tokens();
    if (total == 0) {
        throw ValidationError("cannot analyze an empty dataset");
    }
    const std::size_t size = config.num_layers + 1;
    const std::size_t nseq = data.sequences.size();
    workers = std::clamp<std::size_t>(workers, 1, nseq);

    std::vector<SimilarityAccumulator> shards(workers, SimilarityAccumulator(size));
    std::vector<std::exception_ptr> errors(workers);
    auto run_shard = [&](std::size_t w) {
        try {
            const std::size_t begin = nseq * w / workers;
            const std::size_t end = nseq * (w + 1) / workers;
            for (std::size_t s = begin; s < end; ++s) {
                forward_with_taps(config, weights, data.sequences[s],
                                  [&](const LayerTapFrame& f) { shards[w].accumulate(f); });
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    if (workers == 1) {
        run_shard(0);
    } else {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back(run_shard, w);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    SimilarityAccumulator total_acc(size);
    for (const auto& shard : shards) {
        total_acc.merge(shard);
    }
    if (total_acc.token_count() != total) {
        throw Error("internal: accumulated " + std::to_string(total_acc.token_count()) +
                    " tokens, expected " + std::to_string(total));
    }
    return total_acc.finalize();
}

std::string to_csv(const SimilarityMatrix& sim) {
    std::string out = "# asc-sim v1 layers=" + std::to_string(sim.size()) +
                      " tokens=" + std::to_string(sim.token_count()) + "\n";
    for (std::size_t i = 0; i < sim.size(); ++i) {
        for (std::size_t j = 0; j < sim.size(); ++j) {
            if (j > 0) {
                out += ',';
            }
            out += format_double(sim(i, j));
        }
        out += '\n';
    }
    return out;
}

namespace {

std::size_t parse_header_field(std::string_view token, std::string_view key, std::size_t line) {
    if (token.substr(0, key.size()) != key) {
        throw ParseError("expected '" + std::string(key) + "<n>' in header", line);
    }
    token.remove_prefix(key.size());
    std::size_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw ParseError("bad number in header field " + std::string(key), line);
    }
    return v;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

SimilarityMatrix parse_similarity_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        lines.push_back(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    }
    if (lines.empty()) {
        throw ParseError("empty similarity file", 1);
    }

    const std::string_view header = trim(lines[0]);
    constexpr std::string_view prefix = "# asc-sim v1 ";
    if (header.substr(0, prefix.size()) != prefix) {
        throw ParseError("missing '# asc-sim v1' header", 1);
    }
    const std::string_view fields = header.substr(prefix.size());
    const auto space = fields.find(' ');
    if (space == std::string_view::npos) {
        throw ParseError("header needs layers= and tokens= fields", 1);
    }
    const std::size_t size = parse_header_field(fields.substr(0, space), "layers=", 1);
    const std::size_t tokens = parse_header_field(trim(fields.substr(space + 1)), "tokens=", 1);
    if (size < 1) {
        throw ParseError("layers must be at least 1", 1);
    }

    std::vector<double> values;
    values.reserve(size * size);
    std::size_t row = 0;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        const std::string_view line = trim(lines[ln]);
        if (line.empty()) {
            continue;
        }
        const std::size_t line_no = ln + 1;
        if (row == size) {
            throw ParseError("more than " + std::to_string(size) + " rows", line_no);
        }
        std::size_t col = 0;
        std::string_view rest = line;
        while (true) {
            const auto comma = rest.find(',');
            const std::string_view cell = trim(rest.substr(0, comma));
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
                throw ParseError("bad value '" + std::string(cell) + "' in column " +
                                     std::to_string(col + 1),
                                 line_no);
            }
            if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
                throw ParseError("value " + std::string(cell) + " outside [-1, 1]", line_no);
            }
            values.push_back(v);
            ++col;
            if (comma == std::string_view::npos) {
                break;
            }
            rest = rest.substr(comma + 1);
        }
        if (col != size) {
            throw ParseError("expected " + std::to_string(size) + " columns, got " +
                                 std::to_string(col),
                             line_no);
        }
        for (std::size_t j = 0; j < row; ++j) {
            if (values[row * size + j] != values[j * size + row]) {
                throw ParseError("matrix not symmetric at (" + std::to_string(row) + "," +
                                     std::to_string(j) + ")",
                                 line_no);
            }
        }
        if (tokens > 0 && values[row * size + row] != 1.0) {
            throw ParseError("diagonal entry is not 1", line_no);
        }
        ++row;
    }
    if (row != size) {
        throw ParseError("expected " + std::to_string(size) + " rows, got " + std::to_string(row),
                         lines.size());
    }
    return SimilarityMatrix(size, std::move(values), tokens);
}

void write_similarity_csv(const SimilarityMatrix& sim, const std::filesystem::path& path) {
    write_file_atomic(path, to_csv(sim));
}

SimilarityMatrix read_similarity_csv(const std::filesystem::path& path) {
    return parse_similarity_csv(read_file_text(path));
}

std::string fingerprint(const SimilarityMatrix& sim) { return hex64(fnv1a64(to_csv(sim))); }

} // namespace asc
