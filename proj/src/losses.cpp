#include "factormi/losses.hpp"

#include <cmath>

#include "factormi/errors.hpp"

namespace factormi {

GeneratorLoss generator_loss_from_string(const std::string& s) {
    if (s == "minimax") return GeneratorLoss::minimax;
    if (s == "non_saturating") return GeneratorLoss::non_saturating;
    throw ConfigError("unknown generator loss '" + s + "' (expected minimax or non_saturating)");
}

std::string to_string(GeneratorLoss k) {
    return k == GeneratorLoss::minimax ? "minimax" : "non_saturating";
}

AdvLosses adversarial_losses(const std::vector<Tensor>& d_real_scores,
                             const std::vector<Tensor>& d_fake_scores,
                             GeneratorLoss kind, Tape* tape) {
    if (d_real_scores.empty() || d_fake_scores.empty()) {
        throw DataError("adversarial_losses: empty batch");
    }
    std::vector<Tensor> real_terms;  // -log s(d) = softplus(-d)
    real_terms.reserve(d_real_scores.size());
    for (const Tensor& s : d_real_scores) real_terms.push_back(softplus(scale(s, -1.0, tape), tape));
    std::vector<Tensor> fake_terms;  // -log(1 - s(d)) = softplus(d)
    fake_terms.reserve(d_fake_scores.size());
    for (const Tensor& s : d_fake_scores) fake_terms.push_back(softplus(s, tape));

    AdvLosses out;
    out.d_loss = add(mean_of(real_terms, tape), mean_of(fake_terms, tape), tape);
    if (kind == GeneratorLoss::minimax) {
        // mean log(1 - s(d_fake)) = -mean softplus(d_fake)
        out.g_loss = scale(mean_of(fake_terms, tape), -1.0, tape);
    } else {
        // -mean log s(d_fake) = mean softplus(-d_fake)
        std::vector<Tensor> ns_terms;
        ns_terms.reserve(d_fake_scores.size());
        for (const Tensor& s : d_fake_scores) ns_terms.push_back(softplus(scale(s, -1.0, tape), tape));
        out.g_loss = mean_of(ns_terms, tape);
    }
    return out;
}

double total_loss(double l_adv, double l_ce) {
    if (!std::isfinite(l_adv) || !std::isfinite(l_ce)) {
        throw NumericError("total_loss: non-finite input (adv=" + std::to_string(l_adv) +
                           ", ce=" + std::to_string(l_ce) + ")");
    }
    return l_adv + l_ce;
}

}  // namespace factormi
