#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "promptpg/checkpoint.hpp"
#include "promptpg/dataset.hpp"
#include "promptpg/estimator.hpp"
#include "promptpg/metrics.hpp"
#include "promptpg/oracle.hpp"
#include "promptpg/pmi.hpp"
#include "promptpg/prompt_model.hpp"
#include "promptpg/rng.hpp"
#include "promptpg/train_config.hpp"

namespace promptpg {

struct FewShotSplit {
  Dataset train;
  Dataset dev;
  Dataset test;  // everything not drawn for train/dev
  bool truncated = false;  // some class had fewer than 2*shots examples
};

// Per class (in `labels` order): shuffle with the seed, take `shots` for
// train, `shots` for dev, rest to test. Classes that run short contribute
// what they have and set the truncated flag.
FewShotSplit make_few_shot_split(const Dataset& data,
                                 const std::vector<std::string>& labels,
                                 std::size_t shots, std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_train_loss = 0.0;
  double dev_metric = 0.0;
  std::size_t billed_after = 0;
};

struct TrainResult {
  Checkpoint checkpoint;  // best-dev state
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;  // mean sampled loss per training step
  double best_dev = 0.0;
  std::size_t best_epoch = 0;
  std::size_t billed = 0;
};

class Trainer {
 public:
  Trainer(Oracle& oracle, CandidateVocabulary vocab, Verbalizer verbalizer,
          TrainConfig config);

  // One update: draw num_samples prompts, score each on the mini-batch,
  // apply the variance-reduced gradient and project the rows.
  PromptDistribution train_step(const PromptDistribution& dist,
                                std::span<const Example> batch);

  // Full loop with per-epoch dev evaluation and best-dev retention. A
  // budget or oracle failure still writes a valid checkpoint (when a path
  // is given) before the error propagates.
  TrainResult train(const FewShotSplit& split,
                    const std::filesystem::path& checkpoint_path = {});

  const std::vector<double>& step_losses() const { return step_losses_; }

 private:
  double batch_loss(std::span<const Example> batch,
                    std::span<const std::string> prompt_tokens);
  double dev_metric(const PromptDistribution& dist, const Dataset& dev);
  Checkpoint snapshot(const PromptDistribution& dist,
                      std::optional<double> best) const;

  Oracle& oracle_;
  CandidateVocabulary vocab_;
  Verbalizer verbalizer_;
  TrainConfig config_;
  Rng rng_;
  OptimizerState opt_state_;
  std::vector<double> step_losses_;
};

// Accuracy-style evaluation of a fixed prompt over a dataset, billed
// through the oracle in batches.
double evaluate(std::span<const std::string> prompt_tokens,
                const Dataset& data, Oracle& oracle,
                const Verbalizer& verbalizer, Metric metric,
                Placement placement, std::size_t batch_size);

struct TransferResult {
  std::vector<std::string> prompt_tokens;
  double metric = 0.0;
};

// Reuses a trained checkpoint's argmax prompt on a different task.
TransferResult transfer(const Checkpoint& source, const Dataset& target_test,
                        Oracle& oracle, const Verbalizer& target_verbalizer,
                        Metric metric, std::size_t batch_size);

}  // namespace promptpg
