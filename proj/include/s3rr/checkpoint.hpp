#pragma once

#include <filesystem>

#include <json.hpp>

#include "s3rr/policy.hpp"
#include "s3rr/reward_model.hpp"

namespace s3rr {

using nlohmann::json;

// Checkpoints: JSON with the approximator spec fields and the decimal-encoded
// parameter vector; policies add head, action space and log-std.
json to_json(const ApproximatorSpec& spec);
ApproximatorSpec spec_from_json(const json& j);

json to_json(const RewardModel& model);
RewardModel reward_model_from_json(const json& j);

json to_json(const StochasticPolicy& policy);
StochasticPolicy policy_from_json(const json& j);

void save_checkpoint(const RewardModel& model, const std::filesystem::path& path);
void save_checkpoint(const StochasticPolicy& policy, const std::filesystem::path& path);
RewardModel load_reward_model(const std::filesystem::path& path);
StochasticPolicy load_policy(const std::filesystem::path& path);

}  // namespace s3rr
