#include "factormi/optim.hpp"

#include <cmath>

#include "factormi/errors.hpp"

namespace factormi {

OptimizerKind optimizer_kind_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adamw") return OptimizerKind::adamw;
    throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adamw)");
}

std::string to_string(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adamw";
}

Optimizer::Optimizer(OptimizerConfig cfg, std::vector<Tensor> params)
    : cfg_(cfg), params_(std::move(params)) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(static_cast<size_t>(p.size()), 0.0);
        v_.emplace_back(cfg_.kind == OptimizerKind::adamw ? static_cast<size_t>(p.size()) : 0, 0.0);
    }
}

void Optimizer::step() {
    for (size_t i = 0; i < params_.size(); ++i) {
        if (!params_[i].has_grad()) {
            throw TapeError("optimizer_step: parameter #" + std::to_string(i) +
                            " has no gradient; run backward() first");
        }
    }
    ++t_;
    const double lr = cfg_.learning_rate;
    if (cfg_.kind == OptimizerKind::sgd) {
        for (size_t i = 0; i < params_.size(); ++i) {
            double* p = params_[i].data();
            const double* g = params_[i].grad();
            const int64_t n = params_[i].size();
            if (cfg_.momentum != 0.0) {
                double* mom = m_[i].data();
                for (int64_t j = 0; j < n; ++j) {
                    mom[j] = cfg_.momentum * mom[j] + g[j];
                    p[j] -= lr * mom[j];
                }
            } else {
                for (int64_t j = 0; j < n; ++j) p[j] -= lr * g[j];
            }
        }
        return;
    }
    // AdamW: decoupled weight decay alongside the bias-corrected moment update
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        double* p = params_[i].data();
        const double* g = params_[i].grad();
        double* m = m_[i].data();
        double* v = v_[i].data();
        const int64_t n = params_[i].size();
        for (int64_t j = 0; j < n; ++j) {
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            p[j] -= lr * cfg_.weight_decay * p[j] + lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace factormi
