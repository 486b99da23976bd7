#pragma once

#include <string>
#include <vector>

#include "factormi/tensor.hpp"

namespace factormi {

enum class GeneratorLoss { minimax, non_saturating };

GeneratorLoss generator_loss_from_string(const std::string& s);
std::string to_string(GeneratorLoss k);

struct AdvLosses {
    Tensor d_loss;  // -mean log s(d_real) - mean log(1 - s(d_fake))
    Tensor g_loss;  // minimax: mean log(1 - s(d_fake)); non-saturating: -mean log s(d_fake)
};

// Scores are raw; the logistic map is applied internally through the
// softplus identities log s(x) = -softplus(-x), log(1-s(x)) = -softplus(x).
AdvLosses adversarial_losses(const std::vector<Tensor>& d_real_scores,
                             const std::vector<Tensor>& d_fake_scores,
                             GeneratorLoss kind, Tape* tape = nullptr);

// The reported per-step loss: exact sum of the adversarial and the
// cross-entropy term, no weighting.
double total_loss(double l_adv, double l_ce);

}  // namespace factormi
