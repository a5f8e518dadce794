#include "asc/model.hpp"

#include "asc/error.hpp"
#include "asc/io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <set>

namespace asc {

using json = nlohmann::json;

namespace {

constexpr std::size_t kPreambleSize = 12; // magic + u32 header length
constexpr std::size_t kAlignment = 8;

std::size_t align_up(std::size_t v) { return (v + kAlignment - 1) / kAlignment * kAlignment; }

std::string layer_prefix(std::size_t k) { return "layer." + std::to_string(k) + "."; }

template <typename Layer, typename Out, typename Make>
void append_layer(Layer& l, std::size_t k, Out& out, Make make) {
    const std::string p = layer_prefix(k);
    out.push_back(make(p + "attn.q.w", l.wq));
    out.push_back(make(p + "attn.q.b", l.bq));
    out.push_back(make(p + "attn.k.w", l.wk));
    out.push_back(make(p + "attn.k.b", l.bk));
    out.push_back(make(p + "attn.v.w", l.wv));
    out.push_back(make(p + "attn.v.b", l.bv));
    out.push_back(make(p + "attn.o.w", l.wo));
    out.push_back(make(p + "attn.o.b", l.bo));
    out.push_back(make(p + "ffn.w1", l.w1));
    out.push_back(make(p + "ffn.b1", l.b1));
    out.push_back(make(p + "ffn.w2", l.w2));
    out.push_back(make(p + "ffn.b2", l.b2));
    out.push_back(make(p + "ln1.g", l.ln1_g));
    out.push_back(make(p + "ln1.b", l.ln1_b));
    out.push_back(make(p + "ln2.g", l.ln2_g));
    out.push_back(make(p + "ln2.b", l.ln2_b));
}

void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

std::uint32_t get_u32_le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void put_f32_le(std::uint8_t* dst, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) {
        dst[i] = static_cast<std::uint8_t>(bits >> (8 * i));
    }
}

float get_f32_le(const std::uint8_t* p) { return std::bit_cast<float>(get_u32_le(p)); }

json config_to_json(const ModelConfig& c) {
    return json{
        {"vocab_size", c.vocab_size},
        {"num_layers", c.num_layers},
        {"hidden_dim", c.hidden_dim},
        {"num_heads", c.num_heads},
        {"ffn_dim", c.ffn_dim},
        {"max_seq_len", c.max_seq_len},
        {"norm_mode", std::string(to_string(c.norm_mode))},
        {"layer_norm_eps", static_cast<double>(c.layer_norm_eps)},
        {"layer_ids", c.layer_ids},
    };
}

ModelConfig config_from_json(const json& j) {
    static const std::set<std::string> known = {"vocab_size", "num_layers",  "hidden_dim",
                                                "num_heads",  "ffn_dim",     "max_seq_len",
                                                "norm_mode",  "layer_norm_eps", "layer_ids"};
    if (!j.is_object()) {
        throw FormatError(FormatError::Kind::malformed_header, "config is not an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) {
            throw FormatError(FormatError::Kind::malformed_header, "unknown config field '" + key + "'");
        }
    }
    ModelConfig c;
    try {
        c.vocab_size = j.at("vocab_size").get<std::size_t>();
        c.num_layers = j.at("num_layers").get<std::size_t>();
        c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
        c.num_heads = j.at("num_heads").get<std::size_t>();
        c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
        c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
        c.norm_mode = norm_mode_from_string(j.at("norm_mode").get<std::string>());
        c.layer_norm_eps = static_cast<float>(j.at("layer_norm_eps").get<double>());
        c.layer_ids = j.at("layer_ids").get<std::vector<int>>();
    } catch (const json::exception& e) {
        throw FormatError(FormatError::Kind::malformed_header,
                          std::string("bad config field: ") + e.what());
    } catch (const ValidationError& e) {
        throw FormatError(FormatError::Kind::invalid_config, e.what());
    }
    try {
        c.validate();
    } catch (const ValidationError& e) {
        throw FormatError(FormatError::Kind::invalid_config, e.what());
    }
    return c;
}

// Checksum over the canonical dump of the header without its checksum field.
std::string header_checksum(const json& header_without_checksum) {
    return hex64(fnv1a64(header_without_checksum.dump()));
}

} // namespace

std::string_view to_string(NormMode mode) {
    return mode == NormMode::standard ? "standard" : "none";
}

NormMode norm_mode_from_string(std::string_view s) {
    if (s == "standard") {
        return NormMode::standard;
    }
    if (s == "none") {
        return NormMode::none;
    }
    throw ValidationError("unknown norm_mode '" + std::string(s) + "'");
}

std::vector<int> identity_layer_ids(std::size_t num_layers) {
    std::vector<int> ids(num_layers);
    for (std::size_t i = 0; i < num_layers; ++i) {
        ids[i] = static_cast<int>(i + 1);
    }
    return ids;
}

void ModelConfig::validate() const {
    if (vocab_size == 0) {
        throw ValidationError("vocab_size must be positive");
    }
    if (hidden_dim == 0) {
        throw ValidationError("hidden_dim must be positive");
    }
    if (num_heads == 0) {
        throw ValidationError("num_heads must be positive");
    }
    if (hidden_dim % num_heads != 0) {
        throw ValidationError("hidden_dim " + std::to_string(hidden_dim) +
                              " is not divisible by num_heads " + std::to_string(num_heads) +
                              " (d mod h != 0)");
    }
    if (ffn_dim == 0) {
        throw ValidationError("ffn_dim must be positive");
    }
    if (max_seq_len == 0) {
        throw ValidationError("max_seq_len must be positive");
    }
    if (!(layer_norm_eps > 0.0f)) {
        throw ValidationError("layer_norm_eps must be positive");
    }
    if (layer_ids.size() != num_layers) {
        throw ValidationError("layer_ids has " + std::to_string(layer_ids.size()) +
                              " entries but num_layers is " + std::to_string(num_layers));
    }
    for (std::size_t i = 0; i < layer_ids.size(); ++i) {
        if (layer_ids[i] < 1) {
            throw ValidationError("layer_ids entries must be >= 1");
        }
        if (i > 0 && layer_ids[i] <= layer_ids[i - 1]) {
            throw ValidationError("layer_ids must be strictly increasing");
        }
    }
}

LayerWeights zero_layer(const ModelConfig& c) {
    const std::size_t d = c.hidden_dim;
    const std::size_t f = c.ffn_dim;
    LayerWeights l;
    l.wq = Tensor({d, d});
    l.bq = Tensor({d});
    l.wk = Tensor({d, d});
    l.bk = Tensor({d});
    l.wv = Tensor({d, d});
    l.bv = Tensor({d});
    l.wo = Tensor({d, d});
    l.bo = Tensor({d});
    l.w1 = Tensor({d, f});
    l.b1 = Tensor({f});
    l.w2 = Tensor({f, d});
    l.b2 = Tensor({d});
    l.ln1_g = Tensor({d}, std::vector<float>(d, 1.0f));
    l.ln1_b = Tensor({d});
    l.ln2_g = Tensor({d}, std::vector<float>(d, 1.0f));
    l.ln2_b = Tensor({d});
    return l;
}

ModelWeights zero_weights(const ModelConfig& c) {
    ModelWeights w;
    w.token_embedding = Tensor({c.vocab_size, c.hidden_dim});
    w.position_embedding = Tensor({c.max_seq_len, c.hidden_dim});
    w.layers.assign(c.num_layers, zero_layer(c));
    return w;
}

std::vector<NamedTensorRef> named_tensors(const LayerWeights& layer, std::size_t index) {
    std::vector<NamedTensorRef> out;
    append_layer(layer, index, out,
                 [](std::string n, const Tensor& t) { return NamedTensorRef{std::move(n), &t}; });
    return out;
}

std::vector<NamedTensorRef> named_tensors(const ModelWeights& w) {
    std::vector<NamedTensorRef> out;
    out.push_back({"embed.token", &w.token_embedding});
    out.push_back({"embed.pos", &w.position_embedding});
    for (std::size_t k = 0; k < w.layers.size(); ++k) {
        append_layer(w.layers[k], k, out, [](std::string n, const Tensor& t) {
            return NamedTensorRef{std::move(n), &t};
        });
    }
    return out;
}

std::vector<NamedTensorMut> named_tensors(ModelWeights& w) {
    std::vector<NamedTensorMut> out;
    out.push_back({"embed.token", &w.token_embedding});
    out.push_back({"embed.pos", &w.position_embedding});
    for (std::size_t k = 0; k < w.layers.size(); ++k) {
        append_layer(w.layers[k], k, out,
                     [](std::string n, Tensor& t) { return NamedTensorMut{std::move(n), &t}; });
    }
    return out;
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> canonical_layout(
    const ModelConfig& c) {
    // Shapes come from a zero model so naming and shapes share one definition.
    std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
    const ModelWeights w = zero_weights(c);
    for (const auto& nt : named_tensors(w)) {
        out.emplace_back(nt.name, nt.tensor->shape());
    }
    return out;
}

void validate_model(const ModelConfig& config, const ModelWeights& weights) {
    config.validate();
    if (weights.layers.size() != config.num_layers) {
        throw ValidationError("weights hold " + std::to_string(weights.layers.size()) +
                              " layers but config declares " +
                              std::to_string(config.num_layers));
    }
    const auto layout = canonical_layout(config);
    const auto tensors = named_tensors(weights);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto& [name, shape] = layout[i];
        const Tensor& t = *tensors[i].tensor;
        if (t.shape() != shape) {
            throw ValidationError("tensor " + name + " has shape " + t.shape_string() +
                                  ", expected " + shape_string(shape));
        }
        if (!t.all_finite()) {
            throw ValidationError("tensor " + name + " contains non-finite values");
        }
    }
}

std::vector<std::uint8_t> serialize_model(const ModelConfig& config, const ModelWeights& weights) {
    validate_model(config, weights);

    const auto tensors = named_tensors(weights);
    json tensor_table = json::object();
    std::size_t offset = 0;
    for (const auto& nt : tensors) {
        offset = align_up(offset);
        tensor_table[nt.name] = json{
            {"shape", nt.tensor->shape()},
            {"dtype", "f32"},
            {"offset", offset},
        };
        offset += nt.tensor->size() * sizeof(float);
    }
    const std::size_t payload_size = align_up(offset);

    json header{
        {"version", kModelFormatVersion},
        {"config", config_to_json(config)},
        {"tensors", std::move(tensor_table)},
    };
    header["checksum"] = header_checksum(header);
    const std::string header_text = header.dump();

    std::vector<std::uint8_t> out;
    out.reserve(kPreambleSize + header_text.size() + payload_size);
    out.insert(out.end(), kModelMagic.begin(), kModelMagic.end());
    put_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
    out.insert(out.end(), header_text.begin(), header_text.end());

    const std::size_t payload_start = out.size();
    out.resize(payload_start + payload_size, 0);
    offset = 0;
    for (const auto& nt : tensors) {
        offset = align_up(offset);
        std::uint8_t* dst = out.data() + payload_start + offset;
        for (float v : nt.tensor->data()) {
            put_f32_le(dst, v);
            dst += sizeof(float);
        }
        offset += nt.tensor->size() * sizeof(float);
    }
    return out;
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
    using Kind = FormatError::Kind;
    if (bytes.size() < kPreambleSize) {
        throw FormatError(Kind::truncated, "file shorter than the 12-byte preamble");
    }
    if (std::memcmp(bytes.data(), kModelMagic.data(), kModelMagic.size()) != 0) {
        throw FormatError(Kind::bad_magic, "missing ASCMODL1 magic");
    }
    const std::size_t header_len = get_u32_le(bytes.data() + kModelMagic.size());
    if (bytes.size() - kPreambleSize < header_len) {
        throw FormatError(Kind::truncated, "header length " + std::to_string(header_len) +
                                               " exceeds file size");
    }
    const auto* header_begin = reinterpret_cast<const char*>(bytes.data() + kPreambleSize);

    json header;
    try {
        header = json::parse(header_begin, header_begin + header_len);
    } catch (const json::parse_error& e) {
        throw FormatError(Kind::malformed_header, std::string("header is not valid JSON: ") + e.what());
    }
    if (!header.is_object()) {
        throw FormatError(Kind::malformed_header, "header is not a JSON object");
    }
    for (const auto& [key, _] : header.items()) {
        if (key != "version" && key != "config" && key != "tensors" && key != "checksum") {
            throw FormatError(Kind::malformed_header, "unknown header field '" + key + "'");
        }
    }
    if (!header.contains("version") || !header["version"].is_number_integer()) {
        throw FormatError(Kind::malformed_header, "header has no integer version");
    }
    if (header["version"].get<long long>() != kModelFormatVersion) {
        throw FormatError(Kind::unknown_version,
                          "unsupported model format version " + header["version"].dump());
    }
    if (header.contains("checksum")) {
        if (!header["checksum"].is_string()) {
            throw FormatError(Kind::malformed_header, "checksum must be a string");
        }
        const std::string stored = header["checksum"].get<std::string>();
        json body = header;
        body.erase("checksum");
        if (stored != header_checksum(body)) {
            throw FormatError(Kind::malformed_header, "header checksum mismatch");
        }
        // A checksummed header must also be byte-canonical, otherwise edits that parse to
        // the same values (exponent case, surplus digits) would go unnoticed.
        if (header.dump() != std::string_view(header_begin, header_len)) {
            throw FormatError(Kind::malformed_header, "checksummed header is not canonical JSON");
        }
    }
    if (!header.contains("config") || !header.contains("tensors") ||
        !header["tensors"].is_object()) {
        throw FormatError(Kind::malformed_header, "header lacks config or tensors");
    }

    Model model;
    model.config = config_from_json(header["config"]);
    model.weights = zero_weights(model.config);

    const auto payload = bytes.subspan(kPreambleSize + header_len);
    const json& table = header["tensors"];
    std::size_t expected_offset = 0;
    std::set<std::string> seen;
    for (auto& nt : named_tensors(model.weights)) {
        if (!table.contains(nt.name)) {
            throw FormatError(Kind::missing_tensor, "tensor " + nt.name + " missing from header");
        }
        seen.insert(nt.name);
        const json& entry = table[nt.name];
        std::vector<std::size_t> shape;
        std::size_t offset = 0;
        try {
            if (entry.at("dtype").get<std::string>() != "f32") {
                throw FormatError(Kind::malformed_header,
                                  "tensor " + nt.name + " has unsupported dtype " +
                                      entry.at("dtype").dump());
            }
            shape = entry.at("shape").get<std::vector<std::size_t>>();
            offset = entry.at("offset").get<std::size_t>();
        } catch (const json::exception& e) {
            throw FormatError(Kind::malformed_header,
                              "tensor " + nt.name + " entry is malformed: " + e.what());
        }
        if (shape != nt.tensor->shape()) {
            throw FormatError(Kind::shape_mismatch, "tensor " + nt.name + " has shape " +
                                                        shape_string(shape) + ", expected " +
                                                        nt.tensor->shape_string());
        }
        expected_offset = align_up(expected_offset);
        if (offset != expected_offset) {
            throw FormatError(Kind::bad_offset, "tensor " + nt.name + " at offset " +
                                                    std::to_string(offset) + ", expected " +
                                                    std::to_string(expected_offset));
        }
        const std::size_t nbytes = nt.tensor->size() * sizeof(float);
        if (payload.size() < offset || payload.size() - offset < nbytes) {
            throw FormatError(Kind::truncated, "payload too short for tensor " + nt.name);
        }
        const std::uint8_t* src = payload.data() + offset;
        for (float& v : nt.tensor->data()) {
            v = get_f32_le(src);
            src += sizeof(float);
        }
        if (!nt.tensor->all_finite()) {
            throw FormatError(Kind::non_finite, "tensor " + nt.name + " has non-finite values");
        }
        expected_offset = offset + nbytes;
    }
    if (seen.size() != table.size()) {
        for (const auto& [name, _] : table.items()) {
            if (!seen.count(name)) {
                throw FormatError(Kind::unexpected_tensor, "unexpected tensor " + name);
            }
        }
    }
    if (payload.size() != align_up(expected_offset)) {
        throw FormatError(payload.size() < align_up(expected_offset) ? Kind::truncated
                                                                      : Kind::bad_offset,
                          "payload is " + std::to_string(payload.size()) + " bytes, expected " +
                              std::to_string(align_up(expected_offset)));
    }
    return model;
}

void save_model(const ModelConfig& config, const ModelWeights& weights,
                const std::filesystem::path& path) {
    const auto bytes = serialize_model(config, weights);
    try {
        write_file_atomic(path, bytes);
    } catch (const IoError& e) {
        throw IoError("saving model to " + path.string() + ": " + e.what());
    }
}

Model load_model(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    try {
        return deserialize_model(bytes);
    } catch (const FormatError& e) {
        throw FormatError(e.kind(), path.string() + ": " + e.what());
    }
}

} // namespace asc
