#pragma once

#include <span>
#include <string>
#include <vector>

#include "adagnn/boosting/adagnn.hpp"
#include "adagnn/boosting/weights.hpp"
#include "json.hpp"

namespace adagnn::boosting {

class CheckpointError : public BoostError {
 public:
  using BoostError::BoostError;
};

/// Little-endian float64 bytes, base64 encoded.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& text);

// Config blocks. Readers start from the defaults, reject unknown keys and
// leave validation to the config's own validate().
nlohmann::json to_json(const gnn::EncoderConfig& config);
gnn::EncoderConfig encoder_config_from_json(const nlohmann::json& j, gnn::EncoderConfig base = {});
nlohmann::json to_json(const gnn::TrainHyper& hyper);
gnn::TrainHyper train_hyper_from_json(const nlohmann::json& j, gnn::TrainHyper base = {});
nlohmann::json to_json(const BoostConfig& config);
BoostConfig boost_config_from_json(const nlohmann::json& j, BoostConfig base = {});

/// Throws CheckpointError naming the first key of `j` not in `allowed`.
void require_known_keys(const nlohmann::json& j, std::span<const char* const> allowed, const std::string& block);

nlohmann::json to_json(const gnn::WeakLearnerParams& learner);
gnn::WeakLearnerParams learner_from_json(const nlohmann::json& j);

/// Everything needed to resume boosting or re-export embeddings.
nlohmann::json to_json(const BoostState& state);
BoostState state_from_json(const nlohmann::json& j);

void save_checkpoint(const BoostState& state, const std::string& path);
BoostState load_checkpoint(const std::string& path);

}  // namespace adagnn::boosting
