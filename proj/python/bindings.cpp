#include "asc/error.hpp"
#include "asc/io.hpp"
#include "asc/planner.hpp"
#include "asc/similarity.hpp"
#include "asc/surgery.hpp"
#include "asc/synth.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace asc;

namespace {

using Sequences = std::vector<TokenSequence>;

TokenDataset to_dataset(Sequences seqs) { return TokenDataset{std::move(seqs)}; }

py::array_t<double> matrix_array(const SimilarityMatrix& sim) {
    py::array_t<double> out({sim.size(), sim.size()});
    std::copy(sim.values().begin(), sim.values().end(), out.mutable_data());
    return out;
}

py::array_t<float> tensor_array(const Tensor& t) {
    py::array_t<float> out({t.rows(), t.cols()});
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

SimilarityMatrix matrix_from_array(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
    std::size_t token_count) {
    if (a.ndim() != 2 || a.shape(0) != a.shape(1)) {
        throw DimensionError("similarity matrix must be square");
    }
    const auto n = static_cast<std::size_t>(a.shape(0));
    return SimilarityMatrix(n, std::vector<double>(a.data(), a.data() + n * n), token_count);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Layer similarity analysis and redundant-layer pruning for transformer encoders";

    auto base = py::register_exception<Error>(m, "AscError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    py::class_<Model>(m, "Model")
        .def_property_readonly("num_layers", [](const Model& x) { return x.config.num_layers; })
        .def_property_readonly("hidden_dim", [](const Model& x) { return x.config.hidden_dim; })
        .def_property_readonly("num_heads", [](const Model& x) { return x.config.num_heads; })
        .def_property_readonly("ffn_dim", [](const Model& x) { return x.config.ffn_dim; })
        .def_property_readonly("vocab_size", [](const Model& x) { return x.config.vocab_size; })
        .def_property_readonly("max_seq_len", [](const Model& x) { return x.config.max_seq_len; })
        .def_property_readonly("norm_mode",
                               [](const Model& x) { return std::string(to_string(x.config.norm_mode)); })
        .def_property_readonly("layer_ids", [](const Model& x) { return x.config.layer_ids; })
        .def("save", [](const Model& x, const std::filesystem::path& p) {
            save_model(x.config, x.weights, p);
        })
        .def("to_bytes", [](const Model& x) {
            const auto b = serialize_model(x.config, x.weights);
            return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
        })
        .def_static("from_bytes", [](const py::bytes& b) {
            const std::string s = b;
            return deserialize_model(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
        })
        .def("__repr__", [](const Model& x) {
            return "<Model layers=" + std::to_string(x.config.num_layers) +
                   " hidden=" + std::to_string(x.config.hidden_dim) + ">";
        });

    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "gen_model",
        [](std::size_t layers, std::size_t hidden, std::size_t heads, std::size_t ffn,
           std::size_t vocab, std::size_t max_seq_len, std::set<int> identity, std::uint64_t seed) {
            SynthSpec spec{.num_layers = layers, .hidden_dim = hidden, .num_heads = heads,
                           .ffn_dim = ffn, .vocab_size = vocab, .max_seq_len = max_seq_len,
                           .identity_layers = std::move(identity), .seed = seed};
            return gen_model(spec).model;
        },
        py::arg("layers") = 6, py::arg("hidden") = 32, py::arg("heads") = 4, py::arg("ffn") = 64,
        py::arg("vocab") = 100, py::arg("max_seq_len") = 64,
        py::arg("identity") = std::set<int>{}, py::arg("seed") = 0);

    m.def(
        "gen_dataset",
        [](std::size_t n, std::size_t min_len, std::size_t max_len, std::size_t vocab,
           std::uint64_t seed) { return gen_dataset(n, min_len, max_len, vocab, seed).sequences; },
        py::arg("sequences"), py::arg("min_len"), py::arg("max_len"), py::arg("vocab"),
        py::arg("seed") = 0);

    py::class_<SimilarityMatrix>(m, "SimilarityMatrix")
        .def(py::init(&matrix_from_array), py::arg("values"), py::arg("token_count") = 1)
        .def_property_readonly("size", &SimilarityMatrix::size)
        .def_property_readonly("token_count", &SimilarityMatrix::token_count)
        .def_property_readonly("values", &matrix_array)
        .def("to_csv", [](const SimilarityMatrix& s) { return to_csv(s); })
        .def_static("from_csv", [](const std::string& text) { return parse_similarity_csv(text); })
        .def("fingerprint", [](const SimilarityMatrix& s) { return fingerprint(s); });

    m.def(
        "analyze",
        [](const Model& model, Sequences seqs, std::size_t workers) {
            const TokenDataset data = to_dataset(std::move(seqs));
            py::gil_scoped_release release;
            return analyze(model.config, model.weights, data, workers);
        },
        py::arg("model"), py::arg("sequences"), py::arg("workers") = 1);

    py::class_<PrunePlan>(m, "PrunePlan")
        .def_property_readonly("mode", [](const PrunePlan& p) {
            return p.mode == PlanMode::asc ? "asc" : "random";
        })
        .def_readonly("threshold", &PrunePlan::threshold)
        .def_readonly("redundant_layers", &PrunePlan::redundant_layers)
        .def_property_readonly("anchors", [](const PrunePlan& p) {
            std::vector<std::pair<int, int>> out;
            for (const auto& a : p.anchors) out.emplace_back(a.from, a.to);
            return out;
        })
        .def_readonly("matrix_fingerprint", &PrunePlan::matrix_fingerprint)
        .def_readonly("seed", &PrunePlan::seed)
        .def("to_json", [](const PrunePlan& p) { return plan_to_json(p); })
        .def_static("from_json", [](const std::string& s) { return plan_from_json(s); })
        .def("__eq__", [](const PrunePlan& a, const PrunePlan& b) { return a == b; });

    m.def("plan", &plan, py::arg("sim"), py::arg("threshold"));
    m.def("plan_random", &plan_random, py::arg("num_layers"), py::arg("count"), py::arg("seed"));

    m.def(
        "apply_plan",
        [](const Model& model, const PrunePlan& p) {
            return apply_plan(model.config, model.weights, p).model;
        },
        py::arg("model"), py::arg("plan"));

    m.def(
        "compare_models",
        [](const Model& a, const Model& b, Sequences seqs, std::size_t workers) {
            const TokenDataset data = to_dataset(std::move(seqs));
            DivergenceReport r;
            {
                py::gil_scoped_release release;
                r = compare_models(a.config, a.weights, b.config, b.weights, data, workers);
            }
            py::dict d;
            d["token_count"] = r.token_count;
            d["mean_cosine"] = r.mean_cosine;
            d["min_cosine"] = r.min_cosine;
            d["max_abs_diff"] = r.max_abs_diff;
            return d;
        },
        py::arg("model_a"), py::arg("model_b"), py::arg("sequences"), py::arg("workers") = 1);

    m.def(
        "forward",
        [](const Model& model, const TokenSequence& seq) {
            return tensor_array(forward(model.config, model.weights, seq));
        },
        py::arg("model"), py::arg("sequence"));
}
