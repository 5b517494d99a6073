#include "aead/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "aead/csv.hpp"
#include "aead/error.hpp"
#include "aead/io.hpp"
#include "json.hpp"

namespace aead {

namespace {

using nlohmann::json;

constexpr std::string_view kFormatName = "aead-checkpoint";

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double unhex(const json& j, std::string_view what) {
    if (!j.is_string()) {
        throw FormatError(fmt::format("checkpoint field '{}' must be a hex-float string", what));
    }
    const auto parsed = csv::parse_double(j.get<std::string>());
    if (parsed.status != csv::ParseStatus::Ok || !std::isfinite(parsed.value)) {
        throw FormatError(fmt::format("checkpoint field '{}' holds an invalid number", what));
    }
    return parsed.value;
}

json hex_array(std::span<const double> values) {
    json arr = json::array();
    for (double v : values) arr.push_back(hex(v));
    return arr;
}

std::vector<double> unhex_array(const json& j, std::string_view what) {
    if (!j.is_array()) {
        throw FormatError(fmt::format("checkpoint field '{}' must be an array", what));
    }
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(unhex(v, what));
    return out;
}

const json& field(const json& obj, std::string_view name) {
    if (!obj.is_object()) {
        throw FormatError("checkpoint section is not an object");
    }
    const auto it = obj.find(std::string(name));
    if (it == obj.end()) {
        throw FormatError(fmt::format("checkpoint is missing field '{}'", name));
    }
    return *it;
}

std::size_t size_field(const json& obj, std::string_view name) {
    const auto& j = field(obj, name);
    if (!j.is_number_unsigned()) {
        throw FormatError(fmt::format("checkpoint field '{}' must be a non-negative integer", name));
    }
    return j.get<std::size_t>();
}

Checkpoint parse(const json& doc) {
    Checkpoint ck;
    const auto& spec = field(doc, "spec");
    const auto& kind = field(spec, "kind");
    if (!kind.is_string()) throw FormatError("checkpoint spec kind must be a string");
    try {
        ck.spec.kind = parse_architecture(kind.get<std::string>());
    } catch (const ConfigError& e) {
        throw FormatError(fmt::format("checkpoint spec: {}", e.what()));
    }
    ck.spec.input_dim = size_field(spec, "input_dim");
    ck.spec.hidden_dim = size_field(spec, "hidden_dim");
    ck.spec.latent_dim = size_field(spec, "latent_dim");

    const auto& widths_j = field(doc, "widths");
    const auto& acts_j = field(doc, "activations");
    const auto& weights_j = field(doc, "weights");
    const auto& biases_j = field(doc, "biases");
    if (!widths_j.is_array() || !acts_j.is_array() || !weights_j.is_array() || !biases_j.is_array()) {
        throw FormatError("checkpoint widths/activations/weights/biases must be arrays");
    }
    std::vector<std::size_t> widths;
    for (const auto& w : widths_j) {
        if (!w.is_number_unsigned()) throw FormatError("checkpoint widths must be integers");
        widths.push_back(w.get<std::size_t>());
    }
    if (widths.size() < 2) throw FormatError("checkpoint needs at least two widths");
    const std::size_t n_layers = widths.size() - 1;
    if (acts_j.size() != n_layers || weights_j.size() != n_layers || biases_j.size() != n_layers) {
        throw FormatError(fmt::format("checkpoint has {} widths but {} activations, {} weight and {} bias arrays",
                                      widths.size(), acts_j.size(), weights_j.size(), biases_j.size()));
    }
    try {
        if (layer_widths(ck.spec) != widths) {
            throw FormatError("checkpoint widths do not match its architecture spec");
        }
    } catch (const ConfigError& e) {
        throw FormatError(fmt::format("checkpoint spec: {}", e.what()));
    }

    for (std::size_t k = 0; k < n_layers; ++k) {
        DenseLayer layer;
        if (!acts_j[k].is_string()) throw FormatError("checkpoint activations must be strings");
        layer.activation = parse_activation(acts_j[k].get<std::string>());
        const auto w = unhex_array(weights_j[k], "weights");
        if (w.size() != widths[k] * widths[k + 1]) {
            throw FormatError(fmt::format("checkpoint layer {} has {} weights, expected {}", k, w.size(),
                                          widths[k] * widths[k + 1]));
        }
        layer.weights = Matrix(widths[k + 1], widths[k]);
        std::copy(w.begin(), w.end(), layer.weights.values().begin());
        layer.biases = unhex_array(biases_j[k], "biases");
        if (layer.biases.size() != widths[k + 1]) {
            throw FormatError(fmt::format("checkpoint layer {} has {} biases, expected {}", k,
                                          layer.biases.size(), widths[k + 1]));
        }
        ck.net.layers.push_back(std::move(layer));
    }
    ck.net.latent_index = size_field(doc, "latent_index");
    try {
        ck.net.validate();
    } catch (const Error& e) {
        throw FormatError(fmt::format("checkpoint network is inconsistent: {}", e.what()));
    }
    if (ck.net.latent_dim() != ck.spec.latent_dim) {
        throw FormatError("checkpoint latent layer width does not match its spec");
    }

    const auto& norm = field(doc, "normalization");
    try {
        ck.normalizer = Normalizer(unhex_array(field(norm, "min"), "normalization.min"),
                                   unhex_array(field(norm, "max"), "normalization.max"),
                                   unhex_array(field(norm, "median"), "normalization.median"));
    } catch (const FormatError&) {
        throw;
    } catch (const Error& e) {
        throw FormatError(fmt::format("checkpoint normalization is inconsistent: {}", e.what()));
    }
    if (ck.normalizer.dim() != ck.spec.input_dim) {
        throw FormatError(fmt::format("checkpoint normalization covers {} features, model has {}",
                                      ck.normalizer.dim(), ck.spec.input_dim));
    }

    const auto& seed = field(doc, "seed");
    if (!seed.is_number_unsigned()) throw FormatError("checkpoint seed must be a non-negative integer");
    ck.seed = seed.get<std::uint64_t>();

    const auto& loss = field(doc, "loss_config");
    ck.loss.w_s = unhex(field(loss, "w_s"), "loss_config.w_s");
    ck.loss.w_ae = unhex(field(loss, "w_ae"), "loss_config.w_ae");
    ck.loss.clamp_eps = unhex(field(loss, "clamp_eps"), "loss_config.clamp_eps");
    try {
        ck.loss.validate();
    } catch (const ConfigError& e) {
        throw FormatError(fmt::format("checkpoint loss config: {}", e.what()));
    }
    return ck;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ck) {
    ck.net.validate();
    json doc;
    doc["format"] = kFormatName;
    doc["version"] = kCheckpointVersion;
    doc["spec"] = {{"kind", std::string(to_string(ck.spec.kind))},
                   {"input_dim", ck.spec.input_dim},
                   {"hidden_dim", ck.spec.hidden_dim},
                   {"latent_dim", ck.spec.latent_dim}};
    json widths = json::array();
    widths.push_back(ck.net.input_dim());
    json acts = json::array(), weights = json::array(), biases = json::array();
    for (const auto& layer : ck.net.layers) {
        widths.push_back(layer.out_dim());
        acts.push_back(std::string(to_string(layer.activation)));
        weights.push_back(hex_array(layer.weights.values()));
        biases.push_back(hex_array(layer.biases));
    }
    doc["widths"] = std::move(widths);
    doc["activations"] = std::move(acts);
    doc["latent_index"] = ck.net.latent_index;
    doc["weights"] = std::move(weights);
    doc["biases"] = std::move(biases);
    doc["normalization"] = {{"min", hex_array(ck.normalizer.min())},
                            {"max", hex_array(ck.normalizer.max())},
                            {"median", hex_array(ck.normalizer.median())}};
    doc["seed"] = ck.seed;
    doc["loss_config"] = {{"w_s", hex(ck.loss.w_s)},
                          {"w_ae", hex(ck.loss.w_ae)},
                          {"clamp_eps", hex(ck.loss.clamp_eps)}};
    return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("malformed checkpoint: {}", e.what()));
    }
    if (!doc.is_object()) {
        throw FormatError("malformed checkpoint: top level is not an object");
    }
    const auto version = doc.find("version");
    if (version == doc.end() || !version->is_number_integer()) {
        throw FormatError("malformed checkpoint: missing integer 'version'");
    }
    const auto v = version->get<long long>();
    if (v != kCheckpointVersion) {
        throw VersionError(fmt::format("checkpoint format version {} is not supported (expected version {})",
                                       v, kCheckpointVersion));
    }
    try {
        return parse(doc);
    } catch (const json::exception& e) {
        throw FormatError(fmt::format("malformed checkpoint: {}", e.what()));
    }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
    const auto text = checkpoint_to_json(checkpoint);
    write_file_atomic(path, [&](std::ostream& out) { out << text; });
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open checkpoint '{}'", path.string()));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError(fmt::format("failed reading checkpoint '{}'", path.string()));
    }
    return checkpoint_from_json(buf.str());
}

}  // namespace aead
