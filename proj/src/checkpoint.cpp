#include "factormi/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "factormi/errors.hpp"

namespace factormi {

using nlohmann::json;

const Tensor& Checkpoint::tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return t;
    }
    throw DataError("checkpoint: missing tensor '" + name + "'");
}

void save_checkpoint(const std::string& path, const std::string& kind, const json& config,
                     const std::vector<std::pair<std::string, Tensor>>& tensors) {
    json dir = json::array();
    int64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        dir.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
        offset += t.size();
    }
    json header = {{"kind", kind}, {"config", config}, {"tensors", dir}};
    const std::string hs = header.dump();

    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    f.write("FMCK", 4);
    uint32_t version = 1;
    f.write(reinterpret_cast<const char*>(&version), sizeof(version));
    uint64_t hlen = hs.size();
    f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& [name, t] : tensors) {
        f.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!f) throw DataError("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("checkpoint: cannot open '" + path + "'");
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "FMCK", 4) != 0) {
        throw DataError("checkpoint: bad magic in '" + path + "'");
    }
    uint32_t version = 0;
    f.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!f || version != 1) {
        throw DataError("checkpoint: unsupported format version " + std::to_string(version));
    }
    uint64_t hlen = 0;
    f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    std::string hs(hlen, '\0');
    if (!f.read(hs.data(), static_cast<std::streamsize>(hlen))) {
        throw DataError("checkpoint: truncated header in '" + path + "'");
    }
    json header = json::parse(hs, nullptr, false);
    if (header.is_discarded()) throw DataError("checkpoint: malformed header JSON");

    Checkpoint ck;
    ck.kind = header.at("kind").get<std::string>();
    ck.config = header.at("config");
    for (const auto& entry : header.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        Shape shape = entry.at("shape").get<Shape>();
        Tensor t(shape);
        if (!f.read(reinterpret_cast<char*>(t.data()),
                    static_cast<std::streamsize>(t.size() * sizeof(double)))) {
            throw DataError("checkpoint: truncated payload while reading '" + name + "'");
        }
        ck.tensors.emplace_back(name, std::move(t));
    }
    return ck;
}

json model_config_to_json(const ModelConfig& cfg) {
    return {{"n_channels", cfg.n_channels},
            {"n_samples", cfg.n_samples},
            {"n_classes", cfg.n_classes},
            {"conv_filters", cfg.conv_filters},
            {"temporal_kernel", cfg.temporal_kernel},
            {"pool_kernel", cfg.pool_kernel},
            {"pool_stride", cfg.pool_stride},
            {"discriminator_out", cfg.discriminator_out},
            {"discriminator_hidden", cfg.discriminator_hidden},
            {"mlp_hidden1", cfg.mlp_hidden1},
            {"mlp_hidden2", cfg.mlp_hidden2}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.n_channels = j.value("n_channels", cfg.n_channels);
    cfg.n_samples = j.value("n_samples", cfg.n_samples);
    cfg.n_classes = j.value("n_classes", cfg.n_classes);
    cfg.conv_filters = j.value("conv_filters", cfg.conv_filters);
    cfg.temporal_kernel = j.value("temporal_kernel", cfg.temporal_kernel);
    cfg.pool_kernel = j.value("pool_kernel", cfg.pool_kernel);
    cfg.pool_stride = j.value("pool_stride", cfg.pool_stride);
    cfg.discriminator_out = j.value("discriminator_out", cfg.discriminator_out);
    cfg.discriminator_hidden = j.value("discriminator_hidden", cfg.discriminator_hidden);
    cfg.mlp_hidden1 = j.value("mlp_hidden1", cfg.mlp_hidden1);
    cfg.mlp_hidden2 = j.value("mlp_hidden2", cfg.mlp_hidden2);
    cfg.validate();
    return cfg;
}

void save_factor_model(const std::string& path, const FactorModel& model,
                       const Normalizer* normalizer) {
    std::vector<std::pair<std::string, Tensor>> tensors = model.named_parameters();
    if (normalizer) {
        tensors.emplace_back("normalizer.mean",
                             Tensor({static_cast<int>(normalizer->mean.size())}, normalizer->mean));
        tensors.emplace_back(
            "normalizer.stddev",
            Tensor({static_cast<int>(normalizer->stddev.size())}, normalizer->stddev));
    }
    save_checkpoint(path, "factor-model", model_config_to_json(model.config), tensors);
}

FactorModel factor_model_from_checkpoint(const Checkpoint& ck, Normalizer* normalizer) {
    if (ck.kind != "factor-model") {
        throw DataError("checkpoint: expected kind 'factor-model', got '" + ck.kind + "'");
    }
    ModelConfig cfg = model_config_from_json(ck.config);
    FactorModel model = FactorModel::build(cfg, 0);
    for (auto& [name, p] : model.named_parameters()) {
        const Tensor& stored = ck.tensor(name);
        if (stored.shape() != p->shape()) {
            throw DataError("checkpoint: tensor '" + name + "' has shape " +
                            shape_str(stored.shape()) + ", model expects " + shape_str(p->shape()));
        }
        std::memcpy(p->data(), stored.data(), static_cast<size_t>(stored.size()) * sizeof(double));
    }
    if (normalizer) {
        const Tensor& m = ck.tensor("normalizer.mean");
        const Tensor& s = ck.tensor("normalizer.stddev");
        normalizer->mean.assign(m.data(), m.data() + m.size());
        normalizer->stddev.assign(s.data(), s.data() + s.size());
    }
    return model;
}

}  // namespace factormi
