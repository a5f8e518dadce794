#include "asc/planner.hpp"

#include "asc/error.hpp"
#include "asc/io.hpp"
#include "asc/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace asc {

using json = nlohmann::json;

namespace {

void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ValidationError("threshold must be in (0, 1], got " + format_double(threshold));
    }
}

} // namespace

void validate_plan(const PrunePlan& p) {
    for (std::size_t k = 0; k < p.redundant_layers.size(); ++k) {
        if (p.redundant_layers[k] < 1) {
            throw ValidationError("redundant layer " + std::to_string(p.redundant_layers[k]) +
                                  " is not an encoder layer (must be >= 1)");
        }
        if (k > 0 && p.redundant_layers[k] <= p.redundant_layers[k - 1]) {
            throw ValidationError("redundant layers must be sorted and unique");
        }
    }
    if (p.mode == PlanMode::random) {
        if (!p.anchors.empty()) {
            throw ValidationError("random plans carry no anchors");
        }
        if (p.threshold != 0.0) {
            throw ValidationError("random plans record threshold 0");
        }
        return;
    }
    check_threshold(p.threshold);
    std::vector<int> covered;
    int prev_end = -1;
    for (const auto& a : p.anchors) {
        if (a.from < 0 || a.to <= a.from) {
            throw ValidationError("anchor (" + std::to_string(a.from) + "," +
                                  std::to_string(a.to) + ") needs 0 <= i < j");
        }
        if (a.from <= prev_end) {
            throw ValidationError("anchors overlap or are out of order");
        }
        for (int k = a.from + 1; k <= a.to; ++k) {
            covered.push_back(k);
        }
        prev_end = a.to;
    }
    if (covered != p.redundant_layers) {
        throw ValidationError("redundant layers do not equal the union of anchor blocks");
    }
}

PrunePlan plan(const SimilarityMatrix& sim, double threshold) {
    check_threshold(threshold);
    PrunePlan out;
    out.mode = PlanMode::asc;
    out.threshold = threshold;
    out.matrix_fingerprint = fingerprint(sim);

    const std::size_t last = sim.size() - 1;
    std::size_t i = 0;
    while (i <= last) {
        std::size_t j = last;
        // sim(i, i) == 1 >= threshold, so the scan stops at i at the latest.
        while (j > i && sim(i, j) < threshold) {
            --j;
        }
        if (j > i) {
            out.anchors.push_back({static_cast<int>(i), static_cast<int>(j)});
            for (std::size_t k = i + 1; k <= j; ++k) {
                out.redundant_layers.push_back(static_cast<int>(k));
            }
        }
        i = j + 1;
    }
    return out;
}

PrunePlan plan_random(std::size_t num_layers, std::size_t count, std::uint64_t seed) {
    if (count > num_layers) {
        throw ValidationError("cannot remove " + std::to_string(count) + " of " +
                              std::to_string(num_layers) + " layers");
    }
    std::vector<int> pool(num_layers);
    std::iota(pool.begin(), pool.end(), 1);
    Rng rng(seed);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(rng.below(num_layers - k));
        std::swap(pool[k], pool[pick]);
    }
    PrunePlan out;
    out.mode = PlanMode::random;
    out.threshold = 0.0;
    out.seed = seed;
    out.redundant_layers.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(out.redundant_layers.begin(), out.redundant_layers.end());
    return out;
}

std::string plan_to_json(const PrunePlan& p) {
    json anchors = json::array();
    for (const auto& a : p.anchors) {
        anchors.push_back({a.from, a.to});
    }
    json j{
        {"version", 1},
        {"mode", p.mode == PlanMode::asc ? "asc" : "random"},
        {"threshold", p.threshold},
        {"redundant_layers", p.redundant_layers},
        {"anchors", std::move(anchors)},
        {"matrix_fingerprint",
         p.matrix_fingerprint.empty() ? json(nullptr) : json(p.matrix_fingerprint)},
    };
    if (p.seed) {
        j["seed"] = *p.seed;
    }
    return j.dump(2) + "\n";
}

PrunePlan plan_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("plan is not valid JSON: ") + e.what(), 0);
    }
    PrunePlan p;
    try {
        if (j.at("version").get<int>() != 1) {
            throw ParseError("unsupported plan version " + j.at("version").dump(), 0);
        }
        const auto mode = j.at("mode").get<std::string>();
        if (mode == "asc") {
            p.mode = PlanMode::asc;
        } else if (mode == "random") {
            p.mode = PlanMode::random;
        } else {
            throw ParseError("unknown plan mode '" + mode + "'", 0);
        }
        p.threshold = j.at("threshold").get<double>();
        p.redundant_layers = j.at("redundant_layers").get<std::vector<int>>();
        for (const auto& a : j.at("anchors")) {
            if (!a.is_array() || a.size() != 2) {
                throw ParseError("anchors must be [i, j] pairs", 0);
            }
            p.anchors.push_back({a[0].get<int>(), a[1].get<int>()});
        }
        const auto& fp = j.at("matrix_fingerprint");
        if (!fp.is_null()) {
            p.matrix_fingerprint = fp.get<std::string>();
        }
        if (j.contains("seed")) {
            p.seed = j["seed"].get<std::uint64_t>();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed plan: ") + e.what(), 0);
    }
    validate_plan(p);
    return p;
}

void write_plan(const PrunePlan& p, const std::filesystem::path& path) {
    validate_plan(p);
    write_file_atomic(path, plan_to_json(p));
}

PrunePlan read_plan(const std::filesystem::path& path) {
    return plan_from_json(read_file_text(path));
}

} // namespace asc
