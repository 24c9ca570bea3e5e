#include "promptpg/train_config.hpp"

#include <cmath>

#include "promptpg/errors.hpp"

namespace promptpg {

void TrainConfig::validate() const {
  if (prompt_length == 0) throw ConfigError("config: prompt_length must be >= 1");
  if (vocab_size < 2) throw ConfigError("config: vocab_size must be >= 2");
  if (num_samples < 2) throw ConfigError("config: num_samples must be >= 2");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("config: learning_rate must be positive");
  if (epochs == 0) throw ConfigError("config: epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("config: batch_size must be >= 1");
  if (shots == 0) throw ConfigError("config: shots must be >= 1");
  if (!(hinge_margin > 0.0))
    throw ConfigError("config: hinge margin must be positive");
}

std::vector<std::string> TrainConfig::warnings() const {
  std::vector<std::string> out;
  const std::size_t known_lengths[] = {10, 12, 25, 50, 75};
  bool known = false;
  for (std::size_t len : known_lengths) known = known || len == prompt_length;
  if (!known)
    out.push_back("prompt_length " + std::to_string(prompt_length) +
                  " is outside the tuned set {10, 12, 25, 50, 75}");
  if (learning_rate < 1e-5 || learning_rate > 1e-3)
    out.push_back("learning_rate outside the tuned range [1e-5, 1e-3]");
  return out;
}

nlohmann::ordered_json TrainConfig::to_json() const {
  nlohmann::ordered_json j;
  j["prompt_length"] = prompt_length;
  j["vocab_size"] = vocab_size;
  j["num_samples"] = num_samples;
  j["learning_rate"] = learning_rate;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["shots"] = shots;
  j["loss"] = loss_name(loss);
  j["hinge_margin"] = hinge_margin;
  j["optimizer"] = optimizer_name(optimizer);
  j["placement"] = placement_name(placement);
  j["dev_metric"] = metric_name(dev_metric);
  j["billing"] = billing_name(billing);
  j["budget"] = budget;
  j["seed"] = seed;
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    j.at("prompt_length").get_to(c.prompt_length);
    j.at("vocab_size").get_to(c.vocab_size);
    j.at("num_samples").get_to(c.num_samples);
    j.at("learning_rate").get_to(c.learning_rate);
    j.at("epochs").get_to(c.epochs);
    j.at("batch_size").get_to(c.batch_size);
    j.at("shots").get_to(c.shots);
    c.loss = parse_loss(j.at("loss").get<std::string>());
    j.at("hinge_margin").get_to(c.hinge_margin);
    c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
    c.placement = parse_placement(j.at("placement").get<std::string>());
    c.dev_metric = parse_metric(j.at("dev_metric").get<std::string>());
    c.billing = parse_billing(j.at("billing").get<std::string>());
    j.at("budget").get_to(c.budget);
    j.at("seed").get_to(c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad fields: ") + e.what());
  }
  c.validate();
  return c;
}

OptimizerConfig TrainConfig::optimizer_config() const {
  OptimizerConfig oc;
  oc.kind = optimizer;
  oc.learning_rate = learning_rate;
  return oc;
}

}  // namespace promptpg
