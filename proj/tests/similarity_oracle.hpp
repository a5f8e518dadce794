#pragma once

#include "asc/dataset.hpp"
#include "asc/encoder.hpp"
#include "asc/model.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace asc::testing {

// Owns the vectors behind a frame.
struct OwnedFrame {
    std::vector<std::vector<float>> outputs;

    std::vector<std::span<const float>> spans() const {
        std::vector<std::span<const float>> s;
        for (const auto& o : outputs) {
            s.emplace_back(o);
        }
        return s;
    }
};

inline double oracle_cosine(const std::vector<float>& u, const std::vector<float>& v) {
    double uv = 0, uu = 0, vv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uv += double(u[i]) * v[i];
        uu += double(u[i]) * u[i];
        vv += double(v[i]) * v[i];
    }
    if (std::sqrt(uu) < 1e-12 || std::sqrt(vv) < 1e-12) return 0.0;
    return std::clamp(uv / std::sqrt(uu * vv), -1.0, 1.0);
}

// Materialise every frame, then average each pair's cosine in one pass.
inline std::vector<double> materialized_oracle(const Model& m, const TokenDataset& data) {
    std::vector<OwnedFrame> frames;
    for (const auto& seq : data.sequences) {
        forward_with_taps(m.config, m.weights, seq, [&](const LayerTapFrame& f) {
            OwnedFrame o;
            for (auto s : f.layer_outputs) o.outputs.emplace_back(s.begin(), s.end());
            frames.push_back(std::move(o));
        });
    }
    const std::size_t n = m.config.num_layers + 1;
    std::vector<double> mean(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (const auto& f : frames) s += oracle_cosine(f.outputs[i], f.outputs[j]);
            mean[i * n + j] = i == j ? 1.0 : s / frames.size();
        }
    }
    return mean;
}

} // namespace asc::testing
