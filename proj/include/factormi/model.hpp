#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "factormi/data.hpp"
#include "factormi/tensor.hpp"

namespace factormi {

struct ModelConfig {
    int n_channels = 22;
    int n_samples = 1001;
    int n_classes = 4;
    int conv_filters = 40;
    int temporal_kernel = 52;
    int pool_kernel = 68;
    int pool_stride = 14;
    // 1 plays the binary real/fake game; 4 reproduces the published table
    // literally (the four outputs are mean-pooled into one score).
    int discriminator_out = 1;
    int discriminator_hidden = 1280;
    int mlp_hidden1 = 2560;
    int mlp_hidden2 = 1280;

    int conv_width_out() const { return n_samples - temporal_kernel + 1; }
    int pooled_width() const { return (conv_width_out() - pool_kernel) / pool_stride + 1; }
    int feature_length() const { return conv_filters * pooled_width(); }
    int fused_length() const { return 2 * feature_length(); }

    void validate() const;
};

// Two stacked convolutions (temporal 1 x temporal_kernel, then spatial
// n_channels x 1), ELU after each, average pooling, flatten. Used twice with
// independent parameters: once as the adversarially trained common extractor
// and once as the class-specific extractor.
struct ConvExtractor {
    Tensor conv1_w, conv1_b;  // (F,1,1,tk), (F)
    Tensor conv2_w, conv2_b;  // (F,F,C,1), (F)

    Tensor forward(const Tensor& input, const ModelConfig& cfg, Tape* tape = nullptr) const;
    std::vector<Tensor*> parameters();
    std::vector<std::string> layer_signature() const;
};

struct Discriminator {
    Tensor w1, b1, w2, b2, w3, b3;

    // Raw score(s), length = discriminator_out. The logistic map lives in
    // the loss, not here.
    Tensor forward(const Tensor& feature, Tape* tape = nullptr) const;
    // Scalar score: identity for one output, mean over outputs otherwise.
    Tensor score(const Tensor& feature, Tape* tape = nullptr) const;
    std::vector<Tensor*> parameters();
};

struct MlpHead {
    Tensor w1, b1, w2, b2, w3, b3;

    Tensor forward(const Tensor& fused, Tape* tape = nullptr) const;
    std::vector<Tensor*> parameters();
};

struct FactorModel {
    ModelConfig config;
    ConvExtractor common;
    ConvExtractor class_specific;
    Discriminator discriminator;
    MlpHead head;

    static FactorModel build(const ModelConfig& cfg, uint64_t seed);

    Tensor extract_common(const Tensor& input, Tape* tape = nullptr) const;
    Tensor extract_class_specific(const Tensor& input, Tape* tape = nullptr) const;
    Tensor discriminate(const Tensor& feature, Tape* tape = nullptr) const;
    // Concatenates common-then-specific and runs the MLP; returns logits.
    Tensor classify(const Tensor& common_f, const Tensor& specific_f, Tape* tape = nullptr) const;

    int predict(const Tensor& input) const;

    int64_t parameter_count() const;
    std::vector<std::pair<std::string, Tensor*>> named_parameters();
    std::vector<std::pair<std::string, Tensor>> named_parameters() const;
};

// Trial as network input: shape (1, channels, samples).
Tensor to_input(const EegTrial& trial);

}  // namespace factormi
