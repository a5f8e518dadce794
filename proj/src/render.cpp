#include "asc/render.hpp"

#include "asc/error.hpp"
#include "asc/io.hpp"

#include <cmath>

namespace asc {

int heatmap_level(double value) {
    if (!std::isfinite(value) || value < -1.0 || value > 1.0) {
        throw ValidationError("cannot render similarity value " + format_double(value) +
                              " outside [-1, 1]");
    }
    return static_cast<int>(std::floor((value + 1.0) / 2.0 * 255.0 + 0.5));
}

std::vector<int> heatmap_levels(const SimilarityMatrix& sim) {
    std::vector<int> out;
    out.reserve(sim.values().size());
    for (double v : sim.values()) {
        out.push_back(heatmap_level(v));
    }
    return out;
}

namespace {

std::string join_rows(const std::vector<int>& levels, std::size_t n, char sep) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j > 0) {
                out += sep;
            }
            out += std::to_string(levels[i * n + j]);
        }
        out += '\n';
    }
    return out;
}

} // namespace

std::string render_pgm(const SimilarityMatrix& sim) {
    const auto levels = heatmap_levels(sim);
    const std::string n = std::to_string(sim.size());
    return "P2\n" + n + " " + n + "\n255\n" + join_rows(levels, sim.size(), ' ');
}

std::string render_levels_csv(const SimilarityMatrix& sim) {
    return join_rows(heatmap_levels(sim), sim.size(), ',');
}

} // namespace asc
