#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "factormi/tensor.hpp"

namespace factormi {

enum class OptimizerKind { sgd, adamw };

OptimizerKind optimizer_kind_from_string(const std::string& s);
std::string to_string(OptimizerKind k);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adamw;
    double learning_rate = 1e-4;
    double weight_decay = 0.01;  // decoupled; AdamW only
    double momentum = 0.0;       // SGD only
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Owns one state slot per registered parameter. step() reads each
// parameter's gradient buffer (filled by Tape::backward) and updates the
// shared parameter storage in place.
class Optimizer {
public:
    Optimizer(OptimizerConfig cfg, std::vector<Tensor> params);

    void step();
    int64_t step_count() const { return t_; }
    const OptimizerConfig& config() const { return cfg_; }

private:
    OptimizerConfig cfg_;
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;  // first moment / momentum
    std::vector<std::vector<double>> v_;  // second moment (adamw)
    int64_t t_ = 0;
};

}  // namespace factormi
