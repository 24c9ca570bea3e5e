#include "promptpg/trainer.hpp"

#include <algorithm>

#include "promptpg/errors.hpp"

namespace promptpg {

FewShotSplit make_few_shot_split(const Dataset& data,
                                 const std::vector<std::string>& labels,
                                 std::size_t shots, std::uint64_t seed) {
  if (shots == 0) throw InvalidInput("split: shots must be >= 1");
  if (labels.empty()) throw InvalidInput("split: no labels");

  FewShotSplit split;
  Rng rng(derive_seed(seed, 1));
  for (const std::string& label : labels) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (data[i].label == label) idx.push_back(i);
    if (idx.empty())
      throw InvalidInput("split: no examples for label: " + label);
    rng.shuffle(idx);
    const std::size_t n_train = std::min(shots, idx.size());
    const std::size_t n_dev = std::min(shots, idx.size() - n_train);
    if (n_train < shots || n_dev < shots) split.truncated = true;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Example& ex = data[idx[i]];
      if (i < n_train)
        split.train.push_back(ex);
      else if (i < n_train + n_dev)
        split.dev.push_back(ex);
      else
        split.test.push_back(ex);
    }
  }
  for (const Example& ex : data)
    if (std::find(labels.begin(), labels.end(), ex.label) == labels.end())
      throw InvalidInput("split: example label not in label set: " + ex.label);
  return split;
}

Trainer::Trainer(Oracle& oracle, CandidateVocabulary vocab,
                 Verbalizer verbalizer, TrainConfig config)
    : oracle_(oracle),
      vocab_(std::move(vocab)),
      verbalizer_(std::move(verbalizer)),
      config_(std::move(config)),
      rng_(derive_seed(config_.seed, 2)) {
  config_.validate();
  verbalizer_.validate();
  if (vocab_.size() != config_.vocab_size)
    throw InvalidInput("trainer: vocabulary size does not match config");
}

double Trainer::batch_loss(std::span<const Example> batch,
                           std::span<const std::string> prompt_tokens) {
  std::vector<Query> queries;
  std::vector<std::size_t> labels;
  queries.reserve(batch.size());
  for (const Example& ex : batch) {
    queries.push_back(
        make_query(prompt_tokens, verbalizer_.render(ex), config_.placement));
    labels.push_back(verbalizer_.class_of_label(ex.label));
  }
  const std::vector<ClassScores> scores = oracle_.predict(queries, verbalizer_);
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b)
    total += compute_loss(config_.loss, scores[b], labels[b],
                          config_.hinge_margin);
  return total / static_cast<double>(batch.size());
}

PromptDistribution Trainer::train_step(const PromptDistribution& dist,
                                       std::span<const Example> batch) {
  if (batch.empty()) throw InvalidInput("train_step: empty batch");
  SampleBatchRecord record;
  for (std::size_t k = 0; k < config_.num_samples; ++k) {
    PromptSample s = sample(dist, rng_, vocab_);
    const double loss = batch_loss(batch, s.tokens);
    ScoreMatrix score_k = score(dist, s);
    record.add(std::move(s), loss, std::move(score_k));
  }
  double mean_loss = 0.0;
  for (double l : record.losses) mean_loss += l;
  step_losses_.push_back(mean_loss /
                         static_cast<double>(record.losses.size()));

  const GradientEstimate grad = vr_pge(record);
  PromptDistribution updated = dist;
  const OptimizerConfig opt = config_.optimizer_config();
  apply_update(updated, grad, opt, opt_state_);
  return updated;
}

double Trainer::dev_metric(const PromptDistribution& dist, const Dataset& dev) {
  const std::vector<std::string> prompt = argmax_prompt(dist, vocab_);
  return evaluate(prompt, dev, oracle_, verbalizer_, config_.dev_metric,
                  config_.placement, config_.batch_size);
}

Checkpoint Trainer::snapshot(const PromptDistribution& dist,
                             std::optional<double> best) const {
  Checkpoint c;
  c.config = config_;
  c.vocab = vocab_;
  c.set_distribution(dist);
  c.budget_limit = oracle_.ledger().limit();
  c.budget_used = oracle_.ledger().used();
  c.rng_state = rng_.state();
  c.best_dev = best;
  return c;
}

TrainResult Trainer::train(const FewShotSplit& split,
                           const std::filesystem::path& checkpoint_path) {
  if (split.train.empty()) throw InvalidInput("train: empty train split");
  if (split.dev.empty()) throw InvalidInput("train: empty dev split");
  step_losses_.clear();
  opt_state_ = OptimizerState{};

  PromptDistribution dist =
      PromptDistribution::uniform(config_.prompt_length, config_.vocab_size);
  PromptDistribution best_dist = dist;
  std::optional<double> best;

  TrainResult result;
  auto write_checkpoint = [&] {
    result.checkpoint = snapshot(best.has_value() ? best_dist : dist, best);
    if (!checkpoint_path.empty()) result.checkpoint.save(checkpoint_path);
  };

  try {
    for (std::size_t epoch = 1; epoch <= config_.epochs; ++epoch) {
      const std::vector<std::size_t> perm = rng_.permutation(split.train.size());
      const std::size_t first_step = step_losses_.size();
      for (std::size_t start = 0; start < perm.size();
           start += config_.batch_size) {
        const std::size_t stop =
            std::min(perm.size(), start + config_.batch_size);
        std::vector<Example> batch;
        batch.reserve(stop - start);
        for (std::size_t i = start; i < stop; ++i)
          batch.push_back(split.train[perm[i]]);
        dist = train_step(dist, batch);
      }

      const double metric = dev_metric(dist, split.dev);
      if (!best.has_value() || metric > *best) {
        best = metric;
        best_dist = dist;
        result.best_epoch = epoch;
      }

      EpochRecord record;
      record.epoch = epoch;
      double loss_sum = 0.0;
      for (std::size_t i = first_step; i < step_losses_.size(); ++i)
        loss_sum += step_losses_[i];
      record.mean_train_loss =
          loss_sum / static_cast<double>(step_losses_.size() - first_step);
      record.dev_metric = metric;
      record.billed_after = oracle_.ledger().used();
      result.epochs.push_back(record);
    }
  } catch (const BudgetExceeded&) {
    write_checkpoint();
    throw;
  } catch (const OracleUnavailable&) {
    write_checkpoint();
    throw;
  }

  result.best_dev = best.value();
  result.step_losses = step_losses_;
  result.billed = oracle_.ledger().used();
  write_checkpoint();
  return result;
}

double evaluate(std::span<const std::string> prompt_tokens,
                const Dataset& data, Oracle& oracle,
                const Verbalizer& verbalizer, Metric metric,
                Placement placement, std::size_t batch_size) {
  if (data.empty()) throw InvalidInput("evaluate: empty dataset");
  if (batch_size == 0) throw InvalidInput("evaluate: batch_size must be >= 1");
  std::vector<std::size_t> predictions;
  std::vector<std::size_t> labels;
  predictions.reserve(data.size());
  labels.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t stop = std::min(data.size(), start + batch_size);
    std::vector<Query> queries;
    queries.reserve(stop - start);
    for (std::size_t i = start; i < stop; ++i) {
      queries.push_back(make_query(prompt_tokens,
                                   verbalizer.render(data[i]), placement));
      labels.push_back(verbalizer.class_of_label(data[i].label));
    }
    const std::vector<ClassScores> scores = oracle.predict(queries, verbalizer);
    for (const ClassScores& s : scores) predictions.push_back(s.predicted());
  }
  return compute_metric(metric, predictions, labels, verbalizer.num_classes());
}

TransferResult transfer(const Checkpoint& source, const Dataset& target_test,
                        Oracle& oracle, const Verbalizer& target_verbalizer,
                        Metric metric, std::size_t batch_size) {
  const PromptDistribution dist = source.distribution();
  TransferResult result;
  result.prompt_tokens = argmax_prompt(dist, source.vocab);
  result.metric =
      evaluate(result.prompt_tokens, target_test, oracle, target_verbalizer,
               metric, source.config.placement, batch_size);
  return result;
}

}  // namespace promptpg
