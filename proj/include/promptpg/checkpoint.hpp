#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "promptpg/pmi.hpp"
#include "promptpg/prompt_model.hpp"
#include "promptpg/train_config.hpp"

namespace promptpg {

// Serialized training state. Row probabilities are stored as
// shortest-round-trip decimal strings so a reloaded checkpoint reproduces
// the exact doubles and two identical runs write identical bytes.
struct Checkpoint {
  static constexpr int kVersion = 1;

  TrainConfig config;
  CandidateVocabulary vocab;
  std::vector<std::vector<std::string>> rows;
  std::size_t budget_limit = 0;
  std::size_t budget_used = 0;
  std::string rng_state;
  std::optional<double> best_dev;

  void set_distribution(const PromptDistribution& dist);
  PromptDistribution distribution() const;

  nlohmann::ordered_json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

// Shortest decimal string that round-trips to exactly this double.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace promptpg
