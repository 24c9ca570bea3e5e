#pragma once

#include <cstddef>
#include <vector>

#include "promptpg/matrix.hpp"
#include "promptpg/prompt_model.hpp"

namespace promptpg {

// Parallel arrays for the I prompt samples drawn in one training step.
struct SampleBatchRecord {
  std::vector<PromptSample> samples;
  std::vector<double> losses;
  std::vector<ScoreMatrix> scores;

  std::size_t size() const { return samples.size(); }
  void add(PromptSample sample, double loss, ScoreMatrix score);
  void validate(std::size_t min_samples) const;
};

// Variance-reduced estimate: mean of (L_k - mean(L)) * score_k scaled by
// 1/(I-1). Requires at least two samples.
GradientEstimate vr_pge(const SampleBatchRecord& record);

// Baseline-free estimate: mean of L_k * score_k.
GradientEstimate plain_pge(const SampleBatchRecord& record);

}  // namespace promptpg
