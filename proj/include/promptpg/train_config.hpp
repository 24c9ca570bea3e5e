#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptpg/metrics.hpp"
#include "promptpg/oracle.hpp"
#include "promptpg/prompt_model.hpp"

namespace promptpg {

struct TrainConfig {
  std::size_t prompt_length = 50;
  std::size_t vocab_size = 100;
  std::size_t num_samples = 4;  // prompts drawn per training step
  double learning_rate = 1e-4;
  std::size_t epochs = 30;
  std::size_t batch_size = 4;
  std::size_t shots = 16;  // few-shot examples per class for train and dev
  LossKind loss = LossKind::cross_entropy;
  double hinge_margin = 1.0;
  OptimizerKind optimizer = OptimizerKind::projected_sgd;
  Placement placement = Placement::prefix;
  Metric dev_metric = Metric::accuracy;
  BillingUnit billing = BillingUnit::per_batch;
  std::size_t budget = 8000;
  std::uint64_t seed = 0;

  void validate() const;  // hard errors only
  // Settings outside the ranges the method was tuned for; callers print
  // these and proceed.
  std::vector<std::string> warnings() const;

  nlohmann::ordered_json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);

  OptimizerConfig optimizer_config() const;
};

}  // namespace promptpg
