#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "promptpg/dataset.hpp"
#include "promptpg/oracle.hpp"
#include "promptpg/pmi.hpp"

namespace promptpg {

// Synthetic scoring task with known planted tokens: each occurrence of a
// class's planted token in the query text adds `weight` to that class's
// score on top of a per-input base score.
struct PlantedTaskSpec {
  std::size_t num_classes = 2;
  double weight = 1.0;
  std::vector<std::vector<std::string>> planted;  // per-class token lists
  std::map<std::string, std::vector<double>> base_scores;  // keyed by input text
  std::vector<double> default_base;  // for inputs not listed above

  void validate() const;
  std::vector<double> class_scores_for(const std::string& query_text) const;

  void save(const std::filesystem::path& path) const;
  static PlantedTaskSpec load(const std::filesystem::path& path);
};

// Word-boundary occurrence count of `token` (which may contain spaces)
// inside `text`.
std::size_t count_token_occurrences(const std::string& text,
                                    const std::string& token);

class PlantedOracle : public Oracle {
 public:
  PlantedOracle(PlantedTaskSpec spec, BudgetLedger& ledger,
                BillingUnit billing = BillingUnit::per_batch);

  const PlantedTaskSpec& spec() const { return spec_; }

 protected:
  std::vector<ClassScores> score_batch(std::span<const Query> queries,
                                       const Verbalizer& verbalizer) override;

 private:
  PlantedTaskSpec spec_;
};

struct PlantedTaskParams {
  std::size_t prompt_length = 3;
  std::size_t vocab_size = 10;   // fillers + one planted token per class
  std::size_t shots = 16;        // train pool holds 2*shots per class
  std::size_t test_per_class = 16;
  double signal = 1.0;
  double weight = 2.0;
  std::string input_prefix = "doc";

  void validate() const;
};

struct PlantedTask {
  PlantedTaskSpec spec;
  Dataset train_pool;  // 2*shots per class, labels "0"/"1"
  Dataset test;
  CandidateVocabulary vocab;
  Verbalizer verbalizer;
};

// Binary task where the base scores suppress class 0 by
// prompt_length * weight, so the all-planted-token prompt exactly cancels
// the bias and is the unique expected-loss minimizer. Input ids never share
// tokens with candidate or label words.
PlantedTask make_planted_task(const PlantedTaskParams& params);

}  // namespace promptpg
