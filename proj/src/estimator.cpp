#include "promptpg/estimator.hpp"

#include <cmath>

#include "promptpg/errors.hpp"
#include "promptpg/kernels.hpp"

namespace promptpg {

void SampleBatchRecord::add(PromptSample sample, double loss,
                            ScoreMatrix score) {
  samples.push_back(std::move(sample));
  losses.push_back(loss);
  scores.push_back(std::move(score));
}

void SampleBatchRecord::validate(std::size_t min_samples) const {
  if (samples.size() != losses.size() || samples.size() != scores.size())
    throw InvalidInput("batch record: ragged sample/loss/score arrays");
  if (samples.size() < min_samples)
    throw InvalidInput("batch record: too few samples");
  for (double l : losses)
    if (!std::isfinite(l)) throw InvalidInput("batch record: non-finite loss");
  for (const ScoreMatrix& s : scores)
    if (!s.same_shape(scores.front()))
      throw InvalidInput("batch record: score shape mismatch");
}

GradientEstimate vr_pge(const SampleBatchRecord& record) {
  record.validate(2);
  const std::size_t count = record.size();
  double mean_loss = 0.0;
  for (double l : record.losses) mean_loss += l;
  mean_loss /= static_cast<double>(count);

  GradientEstimate grad(record.scores.front().rows(),
                        record.scores.front().cols());
  const double inv = 1.0 / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    kernels::axpy((record.losses[k] - mean_loss) * inv,
                  record.scores[k].data(), grad.data());
  return grad;
}

GradientEstimate plain_pge(const SampleBatchRecord& record) {
  record.validate(1);
  const std::size_t count = record.size();
  GradientEstimate grad(record.scores.front().rows(),
                        record.scores.front().cols());
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k)
    kernels::axpy(record.losses[k] * inv, record.scores[k].data(), grad.data());
  return grad;
}

}  // namespace promptpg
