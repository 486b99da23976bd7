#include "factormi/model.hpp"

#include <cmath>

#include "factormi/errors.hpp"
#include "factormi/rng.hpp"

namespace factormi {

void ModelConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) throw ConfigError(std::string("model config: ") + name + " must be >= 1");
    };
    positive(n_channels, "n_channels");
    positive(n_samples, "n_samples");
    positive(n_classes, "n_classes");
    positive(conv_filters, "conv_filters");
    positive(temporal_kernel, "temporal_kernel");
    positive(pool_kernel, "pool_kernel");
    positive(pool_stride, "pool_stride");
    positive(discriminator_out, "discriminator_out");
    positive(discriminator_hidden, "discriminator_hidden");
    positive(mlp_hidden1, "mlp_hidden1");
    positive(mlp_hidden2, "mlp_hidden2");
    if (temporal_kernel > n_samples) {
        throw ConfigError("model config: temporal_kernel (" + std::to_string(temporal_kernel) +
                          ") exceeds n_samples (" + std::to_string(n_samples) + ")");
    }
    if (conv_width_out() < pool_kernel || feature_length() < 1) {
        throw ConfigError(
            "model config: derived feature length = conv_filters*floor((n_samples - "
            "temporal_kernel + 1 - pool_kernel)/pool_stride + 1) = " +
            std::to_string(conv_filters) + "*floor((" + std::to_string(n_samples) + " - " +
            std::to_string(temporal_kernel) + " + 1 - " + std::to_string(pool_kernel) + ")/" +
            std::to_string(pool_stride) + " + 1) must be > 0");
    }
}

namespace {

Tensor glorot_uniform(Shape shape, int fan_in, int fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
    Tensor t(std::move(shape));
    for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

ConvExtractor build_extractor(const ModelConfig& cfg, Rng& rng) {
    ConvExtractor e;
    const int f = cfg.conv_filters;
    const int tk = cfg.temporal_kernel;
    const int c = cfg.n_channels;
    e.conv1_w = glorot_uniform({f, 1, 1, tk}, tk, f * tk, rng);
    e.conv1_b = Tensor({f});
    e.conv2_w = glorot_uniform({f, f, c, 1}, f * c, f * c, rng);
    e.conv2_b = Tensor({f});
    return e;
}

void build_linear(Tensor& w, Tensor& b, int n_out, int n_in, Rng& rng) {
    w = glorot_uniform({n_out, n_in}, n_in, n_out, rng);
    b = Tensor({n_out});
}

}  // namespace

Tensor ConvExtractor::forward(const Tensor& input, const ModelConfig& cfg, Tape* tape) const {
    Tensor h = conv2d(input, conv1_w, conv1_b, 1, 1, tape);
    h = elu(h, 1.0, tape);
    h = conv2d(h, conv2_w, conv2_b, 1, 1, tape);
    h = elu(h, 1.0, tape);
    h = avgpool2d(h, 1, cfg.pool_kernel, 1, cfg.pool_stride, tape);
    return h.reshaped({static_cast<int>(h.size())});
}

std::vector<Tensor*> ConvExtractor::parameters() {
    return {&conv1_w, &conv1_b, &conv2_w, &conv2_b};
}

std::vector<std::string> ConvExtractor::layer_signature() const {
    return {
        "conv2d " + shape_str(conv1_w.shape()) + " bias " + shape_str(conv1_b.shape()),
        "elu",
        "conv2d " + shape_str(conv2_w.shape()) + " bias " + shape_str(conv2_b.shape()),
        "elu",
        "avgpool2d",
    };
}

Tensor Discriminator::forward(const Tensor& feature, Tape* tape) const {
    Tensor h = linear(feature, w1, b1, tape);
    h = elu(h, 1.0, tape);
    h = linear(h, w2, b2, tape);
    h = elu(h, 1.0, tape);
    return linear(h, w3, b3, tape);
}

Tensor Discriminator::score(const Tensor& feature, Tape* tape) const {
    Tensor s = forward(feature, tape);
    if (s.size() == 1) return s;
    return mean_all(s, tape);
}

std::vector<Tensor*> Discriminator::parameters() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }

Tensor MlpHead::forward(const Tensor& fused, Tape* tape) const {
    Tensor h = linear(fused, w1, b1, tape);
    h = elu(h, 1.0, tape);
    h = linear(h, w2, b2, tape);
    h = elu(h, 1.0, tape);
    return linear(h, w3, b3, tape);
}

std::vector<Tensor*> MlpHead::parameters() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }

FactorModel FactorModel::build(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    FactorModel m;
    m.config = cfg;
    Rng rng(Rng::derive(seed, 0x10de1));
    m.common = build_extractor(cfg, rng);
    m.class_specific = build_extractor(cfg, rng);
    const int feat = cfg.feature_length();
    build_linear(m.discriminator.w1, m.discriminator.b1, cfg.discriminator_hidden, feat, rng);
    build_linear(m.discriminator.w2, m.discriminator.b2, cfg.discriminator_hidden,
                 cfg.discriminator_hidden, rng);
    build_linear(m.discriminator.w3, m.discriminator.b3, cfg.discriminator_out,
                 cfg.discriminator_hidden, rng);
    build_linear(m.head.w1, m.head.b1, cfg.mlp_hidden1, cfg.fused_length(), rng);
    build_linear(m.head.w2, m.head.b2, cfg.mlp_hidden2, cfg.mlp_hidden1, rng);
    build_linear(m.head.w3, m.head.b3, cfg.n_classes, cfg.mlp_hidden2, rng);
    return m;
}

namespace {
void check_input(const Tensor& input, const ModelConfig& cfg) {
    if (input.ndim() != 3 || input.shape()[0] != 1 || input.shape()[1] != cfg.n_channels ||
        input.shape()[2] != cfg.n_samples) {
        throw ShapeError("model: expected input (1," + std::to_string(cfg.n_channels) + "," +
                         std::to_string(cfg.n_samples) + "), got " + shape_str(input.shape()));
    }
}
}  // namespace

Tensor FactorModel::extract_common(const Tensor& input, Tape* tape) const {
    check_input(input, config);
    return common.forward(input, config, tape);
}

Tensor FactorModel::extract_class_specific(const Tensor& input, Tape* tape) const {
    check_input(input, config);
    return class_specific.forward(input, config, tape);
}

Tensor FactorModel::discriminate(const Tensor& feature, Tape* tape) const {
    if (feature.ndim() != 1 || feature.shape()[0] != config.feature_length()) {
        throw ShapeError("discriminate: expected feature of length " +
                         std::to_string(config.feature_length()) + ", got " +
                         shape_str(feature.shape()));
    }
    return discriminator.forward(feature, tape);
}

Tensor FactorModel::classify(const Tensor& common_f, const Tensor& specific_f, Tape* tape) const {
    const int feat = config.feature_length();
    if (common_f.ndim() != 1 || common_f.shape()[0] != feat) {
        throw ShapeError("classify: common feature must have length " + std::to_string(feat) +
                         ", got " + shape_str(common_f.shape()));
    }
    if (specific_f.ndim() != 1 || specific_f.shape()[0] != feat) {
        throw ShapeError("classify: class-specific feature must have length " +
                         std::to_string(feat) + ", got " + shape_str(specific_f.shape()));
    }
    // order is part of the contract: common first, then class-specific
    Tensor fused = concat(common_f, specific_f, tape);
    return head.forward(fused, tape);
}

int FactorModel::predict(const Tensor& input) const {
    Tensor cf = extract_common(input);
    Tensor sf = extract_class_specific(input);
    return argmax(classify(cf, sf));
}

std::vector<std::pair<std::string, Tensor*>> FactorModel::named_parameters() {
    std::vector<std::pair<std::string, Tensor*>> out;
    auto push = [&out](const std::string& prefix, std::vector<Tensor*> params,
                       const std::vector<std::string>& names) {
        for (size_t i = 0; i < params.size(); ++i) out.emplace_back(prefix + names[i], params[i]);
    };
    const std::vector<std::string> conv_names = {"conv1.weight", "conv1.bias", "conv2.weight",
                                                 "conv2.bias"};
    const std::vector<std::string> lin_names = {"fc1.weight", "fc1.bias", "fc2.weight",
                                                "fc2.bias", "fc3.weight", "fc3.bias"};
    push("common.", common.parameters(), conv_names);
    push("class_specific.", class_specific.parameters(), conv_names);
    push("discriminator.", discriminator.parameters(), lin_names);
    push("head.", head.parameters(), lin_names);
    return out;
}

std::vector<std::pair<std::string, Tensor>> FactorModel::named_parameters() const {
    auto named = const_cast<FactorModel*>(this)->named_parameters();
    std::vector<std::pair<std::string, Tensor>> out;
    out.reserve(named.size());
    for (auto& [name, p] : named) out.emplace_back(name, *p);
    return out;
}

int64_t FactorModel::parameter_count() const {
    int64_t n = 0;
    for (const auto& [name, p] : named_parameters()) n += p.size();
    return n;
}

Tensor to_input(const EegTrial& trial) {
    return Tensor({1, trial.n_channels, trial.n_samples}, trial.samples);
}

}  // namespace factormi
