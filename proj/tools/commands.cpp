#include "asc_cli.hpp"

#include "asc/dataset.hpp"
#include "asc/error.hpp"
#include "asc/io.hpp"
#include "asc/model.hpp"
#include "asc/planner.hpp"
#include "asc/render.hpp"
#include "asc/similarity.hpp"
#include "asc/surgery.hpp"
#include "asc/synth.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

namespace asc::cli {

namespace {

// A usage problem detected after CLI11 parsing (e.g. a value outside its legal range).
class UsageError : public Error {
public:
    using Error::Error;
};

std::string join_ints(const std::vector<int>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + std::to_string(v[i]);
    }
    return s + "]";
}

std::string format_float(float v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::set<int> parse_index_list(const std::string& text) {
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        int v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
            throw UsageError("bad layer index '" + item + "' in list '" + text + "'");
        }
        out.insert(v);
    }
    return out;
}

struct AnalyzeArgs {
    std::string model, data, out;
    std::size_t workers = 1;
};

struct PlanArgs {
    std::string sim, out;
    double threshold = 0.9;
};

struct PruneArgs {
    std::string model, plan, out;
};

struct RandomPruneArgs {
    std::string model, out;
    std::size_t count = 0;
    std::uint64_t seed = 0;
};

struct RenderArgs {
    std::string sim, out, format = "pgm";
};

struct CompareArgs {
    std::string model_a, model_b, data;
    std::size_t workers = 1;
};

struct SynthArgs {
    std::string out;
    std::size_t layers = 6, hidden = 32, heads = 4, ffn = 64, vocab = 100, max_seq_len = 64;
    std::string identity;
    std::uint64_t seed = 0;
};

struct SynthDataArgs {
    std::string out;
    std::size_t sequences = 100, min_len = 8, max_len = 16, vocab = 100;
    std::uint64_t seed = 0;
};

struct ForwardArgs {
    std::string model, data, out;
};

void cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
    if (a.workers < 1) {
        throw UsageError("--workers must be at least 1");
    }
    const Model m = load_model(a.model);
    const TokenDataset data = read_dataset(a.data);
    const SimilarityMatrix sim = analyze(m.config, m.weights, data, a.workers);
    write_similarity_csv(sim, a.out);
    out << "wrote " << sim.size() << "x" << sim.size() << " similarity matrix over "
        << sim.token_count() << " tokens to " << a.out << "\n";
}

void cmd_plan(const PlanArgs& a, std::ostream& out) {
    if (!(a.threshold > 0.0 && a.threshold <= 1.0)) {
        throw UsageError("--threshold must be in (0, 1], got " + format_double(a.threshold));
    }
    const SimilarityMatrix sim = read_similarity_csv(a.sim);
    const PrunePlan p = plan(sim, a.threshold);
    write_plan(p, a.out);
    out << p.redundant_layers.size() << " layers pruned";
    if (!p.redundant_layers.empty()) {
        out << ": " << join_ints(p.redundant_layers);
    }
    out << " (threshold " << format_double(a.threshold) << ")\n";
}

void report_surgery(const SurgeryResult& r, std::ostream& out) {
    out << "removed original layers " << join_ints(r.removed_layer_ids) << "; "
        << r.model.config.num_layers << " layers remain " << join_ints(r.model.config.layer_ids)
        << "\n";
    if (r.embedding_only) {
        out << "warning: every encoder layer was removed; the output is an embedding-only "
               "model\n";
    }
}

void cmd_prune(const PruneArgs& a, std::ostream& out) {
    const Model m = load_model(a.model);
    const PrunePlan p = read_plan(a.plan);
    const SurgeryResult r = apply_plan(m.config, m.weights, p);
    save_model(r.model.config, r.model.weights, a.out);
    report_surgery(r, out);
}

void cmd_random_prune(const RandomPruneArgs& a, std::ostream& out) {
    const Model m = load_model(a.model);
    if (a.count > m.config.num_layers) {
        throw UsageError("--count " + std::to_string(a.count) + " exceeds the model's " +
                         std::to_string(m.config.num_layers) + " layers");
    }
    const PrunePlan p = plan_random(m.config.num_layers, a.count, a.seed);
    const SurgeryResult r = apply_plan(m.config, m.weights, p);
    save_model(r.model.config, r.model.weights, a.out);
    report_surgery(r, out);
}

void cmd_render(const RenderArgs& a, std::ostream& out) {
    const SimilarityMatrix sim = read_similarity_csv(a.sim);
    const std::string text = a.format == "pgm" ? render_pgm(sim) : render_levels_csv(sim);
    write_file_atomic(a.out, text);
    out << "rendered " << sim.size() << "x" << sim.size() << " heatmap to " << a.out << "\n";
}

void cmd_compare(const CompareArgs& a, std::ostream& out) {
    if (a.workers < 1) {
        throw UsageError("--workers must be at least 1");
    }
    const Model ma = load_model(a.model_a);
    const Model mb = load_model(a.model_b);
    const TokenDataset data = read_dataset(a.data);
    const DivergenceReport r =
        compare_models(ma.config, ma.weights, mb.config, mb.weights, data, a.workers);
    out << "tokens=" << r.token_count << " mean_cosine=" << format_double(r.mean_cosine)
        << " min_cosine=" << format_double(r.min_cosine)
        << " max_abs_diff=" << format_double(r.max_abs_diff) << "\n";
}

void cmd_synth(const SynthArgs& a, std::ostream& out) {
    SynthSpec spec;
    spec.num_layers = a.layers;
    spec.hidden_dim = a.hidden;
    spec.num_heads = a.heads;
    spec.ffn_dim = a.ffn;
    spec.vocab_size = a.vocab;
    spec.max_seq_len = a.max_seq_len;
    spec.identity_layers = parse_index_list(a.identity);
    spec.seed = a.seed;
    const SynthModel s = gen_model(spec);
    save_model(s.model.config, s.model.weights, a.out);
    out << "wrote synthetic model (" << spec.num_layers << " layers, d=" << spec.hidden_dim
        << ") to " << a.out << "; probe layer cosines:";
    for (double c : s.layer_cosines) {
        out << " " << format_double(c);
    }
    out << "\n";
}

void cmd_synth_data(const SynthDataArgs& a, std::ostream& out) {
    const TokenDataset data = gen_dataset(a.sequences, a.min_len, a.max_len, a.vocab, a.seed);
    write_dataset(data, a.out);
    out << "wrote " << data.sequences.size() << " sequences (" << data.total_tokens()
        << " tokens) to " << a.out << "\n";
}

void cmd_forward(const ForwardArgs& a, std::ostream& out) {
    const Model m = load_model(a.model);
    const TokenDataset data = read_dataset(a.data);
    validate_dataset(m.config, data);
    std::string csv;
    for (const auto& seq : data.sequences) {
        const Tensor y = forward(m.config, m.weights, seq);
        for (std::size_t t = 0; t < y.rows(); ++t) {
            const auto row = y.row(t);
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (k > 0) {
                    csv += ',';
                }
                csv += format_float(row[k]);
            }
            csv += '\n';
        }
    }
    write_file_atomic(a.out, csv);
    out << "wrote " << data.total_tokens() << " final-layer embeddings to " << a.out << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Application specific layer pruning for encoder-only transformers", "asc"};
    app.require_subcommand(1);

    std::function<void()> action;

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "Build the layer similarity matrix");
    analyze_cmd->add_option("--model", analyze_args.model, "Model file")->required();
    analyze_cmd->add_option("--data", analyze_args.data, "Dataset file")->required();
    analyze_cmd->add_option("--out", analyze_args.out, "Similarity CSV to write")->required();
    analyze_cmd->add_option("--workers", analyze_args.workers, "Worker threads")
        ->capture_default_str();
    analyze_cmd->callback([&] { action = [&] { cmd_analyze(analyze_args, out); }; });

    PlanArgs plan_args;
    auto* plan_cmd = app.add_subcommand("plan", "Select redundant layers from a similarity matrix");
    plan_cmd->add_option("--sim", plan_args.sim, "Similarity CSV")->required();
    plan_cmd->add_option("--threshold", plan_args.threshold, "Similarity threshold in (0, 1]")
        ->required();
    plan_cmd->add_option("--out", plan_args.out, "Plan JSON to write")->required();
    plan_cmd->callback([&] { action = [&] { cmd_plan(plan_args, out); }; });

    PruneArgs prune_args;
    auto* prune_cmd = app.add_subcommand("prune", "Remove the layers named by a plan");
    prune_cmd->add_option("--model", prune_args.model, "Model file")->required();
    prune_cmd->add_option("--plan", prune_args.plan, "Plan JSON")->required();
    prune_cmd->add_option("--out", prune_args.out, "Pruned model to write")->required();
    prune_cmd->callback([&] { action = [&] { cmd_prune(prune_args, out); }; });

    RandomPruneArgs rp_args;
    auto* rp_cmd = app.add_subcommand("random-prune", "Remove a seeded random set of layers");
    rp_cmd->add_option("--model", rp_args.model, "Model file")->required();
    rp_cmd->add_option("--count", rp_args.count, "Number of layers to remove")->required();
    rp_cmd->add_option("--seed", rp_args.seed, "Random seed")->required();
    rp_cmd->add_option("--out", rp_args.out, "Pruned model to write")->required();
    rp_cmd->callback([&] { action = [&] { cmd_random_prune(rp_args, out); }; });

    RenderArgs render_args;
    auto* render_cmd = app.add_subcommand("render", "Render a similarity matrix as a heatmap");
    render_cmd->add_option("--sim", render_args.sim, "Similarity CSV")->required();
    render_cmd->add_option("--out", render_args.out, "Image file to write")->required();
    render_cmd->add_option("--format", render_args.format, "pgm or csv")
        ->check(CLI::IsMember({"pgm", "csv"}))
        ->capture_default_str();
    render_cmd->callback([&] { action = [&] { cmd_render(render_args, out); }; });

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "Compare final-layer outputs of two models");
    compare_cmd->add_option("--model-a", compare_args.model_a, "First model")->required();
    compare_cmd->add_option("--model-b", compare_args.model_b, "Second model")->required();
    compare_cmd->add_option("--data", compare_args.data, "Dataset file")->required();
    compare_cmd->add_option("--workers", compare_args.workers, "Worker threads")
        ->capture_default_str();
    compare_cmd->callback([&] { action = [&] { cmd_compare(compare_args, out); }; });

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic model with planted identity layers");
    synth_cmd->add_option("--out", synth_args.out, "Model file to write")->required();
    synth_cmd->add_option("--layers", synth_args.layers, "Encoder layers")->capture_default_str();
    synth_cmd->add_option("--hidden", synth_args.hidden, "Hidden size")->capture_default_str();
    synth_cmd->add_option("--heads", synth_args.heads, "Attention heads")->capture_default_str();
    synth_cmd->add_option("--ffn", synth_args.ffn, "FFN inner size")->capture_default_str();
    synth_cmd->add_option("--vocab", synth_args.vocab, "Vocabulary size")->capture_default_str();
    synth_cmd->add_option("--max-seq-len", synth_args.max_seq_len, "Maximum sequence length")
        ->capture_default_str();
    synth_cmd->add_option("--identity", synth_args.identity,
                          "Comma-separated 1-based identity layers, e.g. 2,3");
    synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
    synth_cmd->callback([&] { action = [&] { cmd_synth(synth_args, out); }; });

    SynthDataArgs sd_args;
    auto* sd_cmd = app.add_subcommand("synth-data", "Generate a random token dataset");
    sd_cmd->add_option("--out", sd_args.out, "Dataset file to write")->required();
    sd_cmd->add_option("--sequences", sd_args.sequences, "Number of sequences")
        ->capture_default_str();
    sd_cmd->add_option("--min-len", sd_args.min_len, "Minimum length")->capture_default_str();
    sd_cmd->add_option("--max-len", sd_args.max_len, "Maximum length")->capture_default_str();
    sd_cmd->add_option("--vocab", sd_args.vocab, "Vocabulary size")->capture_default_str();
    sd_cmd->add_option("--seed", sd_args.seed, "Random seed")->capture_default_str();
    sd_cmd->callback([&] { action = [&] { cmd_synth_data(sd_args, out); }; });

    ForwardArgs fwd_args;
    auto* fwd_cmd = app.add_subcommand("forward", "Dump final-layer token embeddings as CSV");
    fwd_cmd->add_option("--model", fwd_args.model, "Model file")->required();
    fwd_cmd->add_option("--data", fwd_args.data, "Dataset file")->required();
    fwd_cmd->add_option("--out", fwd_args.out, "CSV to write")->required();
    fwd_cmd->callback([&] { action = [&] { cmd_forward(fwd_args, out); }; });

    std::vector<const char*> argv{"asc"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        action();
    } catch (const UsageError& e) {
        err << "asc: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "asc: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace asc::cli
