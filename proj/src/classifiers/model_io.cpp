#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fgts/classifiers.hpp"
#include "fgts/error.hpp"
#include "fgts/hashing.hpp"

namespace fgts {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::string encode_f32(const std::vector<float>& values) {
    std::vector<std::byte> bytes;
    bytes.reserve(values.size() * 4);
    for (float v : values) {
        const auto u = std::bit_cast<std::uint32_t>(v);
        for (int s = 0; s < 32; s += 8) bytes.push_back(std::byte((u >> s) & 0xff));
    }
    return base64_encode(bytes);
}

std::vector<float> decode_f32(std::string_view text, std::size_t expected) {
    const std::string raw = base64_decode(text);
    if (raw.size() != expected * 4)
        throw ValidationError("malformed probe: expected " + std::to_string(expected) + " weights, got " +
                              std::to_string(raw.size() / 4));
    std::vector<float> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= std::uint32_t(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
        out[i] = std::bit_cast<float>(u);
        if (!std::isfinite(out[i])) throw ValidationError("malformed probe: non-finite weight");
    }
    return out;
}

}  // namespace

std::string protocol_name(const Model& model) {
    return std::holds_alternative<CentroidModel>(model) ? "centroid" : "probe";
}

const std::vector<std::size_t>& model_tokens(const Model& model) {
    return std::visit([](const auto& m) -> const std::vector<std::size_t>& { return m.token_indices; }, model);
}

Prediction predict(const Model& model, std::span<const double> z) {
    return std::visit(overloaded{[&](const CentroidModel& m) { return centroid_predict(m, z); },
                                 [&](const LinearProbe& m) { return probe_predict(m, z); }},
                      model);
}

std::string model_to_json(const Model& model) {
    ordered_json j;
    j["protocol"] = protocol_name(model);
    std::visit(overloaded{[&](const CentroidModel& m) {
                              j["k"] = m.k;
                              j["token_indices"] = m.token_indices;
                              j["dim"] = m.dim();
                              j["mu_real"] = m.mu_real;
                              j["mu_fake"] = m.mu_fake;
                          },
                          [&](const LinearProbe& m) {
                              j["k"] = m.k;
                              j["token_indices"] = m.token_indices;
                              j["dim"] = m.dim;
                              j["normalize_input"] = m.normalize_input;
                              j["bias"] = {m.bias[0], m.bias[1]};
                              j["weights_f32le_b64"] = encode_f32(m.weights);
                              j["training_meta"] = {{"epochs", m.meta.epochs},   {"lr", m.meta.lr},
                                                    {"batch_size", m.meta.batch_size}, {"seed", m.meta.seed},
                                                    {"beta1", m.meta.beta1},     {"beta2", m.meta.beta2},
                                                    {"adam_eps", m.meta.adam_eps}};
                              j["loss_history"] = m.loss_history;
                          }},
               model);
    return j.dump(2) + "\n";
}

Model model_from_json(std::string_view text) {
    try {
        const auto j = json::parse(text);
        const auto protocol = j.at("protocol").get<std::string>();
        if (protocol == "centroid") {
            CentroidModel m;
            m.k = j.at("k").get<std::size_t>();
            m.token_indices = j.at("token_indices").get<std::vector<std::size_t>>();
            m.mu_real = j.at("mu_real").get<Embedding>();
            m.mu_fake = j.at("mu_fake").get<Embedding>();
            if (m.mu_real.size() != m.mu_fake.size() || m.mu_real.empty())
                throw ValidationError("malformed centroid model: centroid sizes differ");
            if (m.token_indices.size() != m.k)
                throw ValidationError("malformed centroid model: token_indices length != k");
            return m;
        }
        if (protocol == "probe") {
            LinearProbe m;
            m.k = j.at("k").get<std::size_t>();
            m.token_indices = j.at("token_indices").get<std::vector<std::size_t>>();
            m.dim = j.at("dim").get<std::size_t>();
            m.normalize_input = j.at("normalize_input").get<bool>();
            const auto bias = j.at("bias").get<std::vector<double>>();
            if (bias.size() != 2) throw ValidationError("malformed probe: bias must have 2 entries");
            m.bias = {static_cast<float>(bias[0]), static_cast<float>(bias[1])};
            m.weights = decode_f32(j.at("weights_f32le_b64").get<std::string>(), 2 * m.dim);
            const auto& tm = j.at("training_meta");
            m.meta.epochs = tm.at("epochs").get<std::size_t>();
            m.meta.lr = tm.at("lr").get<double>();
            m.meta.batch_size = tm.at("batch_size").get<std::size_t>();
            m.meta.seed = tm.at("seed").get<std::uint64_t>();
            m.meta.beta1 = tm.value("beta1", 0.9);
            m.meta.beta2 = tm.value("beta2", 0.999);
            m.meta.adam_eps = tm.value("adam_eps", 1e-8);
            m.loss_history = j.value("loss_history", std::vector<double>{});
            if (m.token_indices.size() != m.k)
                throw ValidationError("malformed probe: token_indices length != k");
            return m;
        }
        throw ValidationError("unknown protocol \"" + protocol + "\"");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model: ") + e.what());
    }
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ValidationError("cannot open " + path.string() + " for writing");
    out << model_to_json(model);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

}  // namespace fgts
