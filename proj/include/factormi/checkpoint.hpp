#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "factormi/model.hpp"
#include "factormi/tensor.hpp"

namespace factormi {

// Self-describing container:
//   "FMCK" | u32 version=1 | u64 header_len | JSON header | float64 LE payload
// The header carries the kind tag, a config echo and the tensor directory
// (name, shape, element offset into the payload).
struct Checkpoint {
    std::string kind;
    nlohmann::json config;
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor& tensor(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const std::string& kind,
                     const nlohmann::json& config,
                     const std::vector<std::pair<std::string, Tensor>>& tensors);

Checkpoint load_checkpoint(const std::string& path);

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

void save_factor_model(const std::string& path, const FactorModel& model,
                       const Normalizer* normalizer = nullptr);
FactorModel factor_model_from_checkpoint(const Checkpoint& ck, Normalizer* normalizer = nullptr);

}  // namespace factormi
