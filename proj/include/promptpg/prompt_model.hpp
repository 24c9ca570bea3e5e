#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "promptpg/matrix.hpp"
#include "promptpg/pmi.hpp"
#include "promptpg/rng.hpp"
#include "promptpg/simplex.hpp"

namespace promptpg {

// Probability of selecting a sampled index is floored at this value before
// taking reciprocals in the score function.
inline constexpr double kScoreProbFloor = 1e-6;

// One categorical distribution per prompt position, all over the same
// candidate vocabulary of size N.
class PromptDistribution {
 public:
  explicit PromptDistribution(std::vector<ProbVector> rows);
  static PromptDistribution uniform(std::size_t length, std::size_t vocab_size);

  std::size_t length() const { return rows_.size(); }
  std::size_t vocab_size() const { return rows_.front().size(); }

  const ProbVector& row(std::size_t i) const { return rows_[i]; }
  void set_row(std::size_t i, ProbVector row);
  const std::vector<ProbVector>& rows() const { return rows_; }

  bool operator==(const PromptDistribution& other) const {
    return rows_ == other.rows_;
  }

 private:
  std::vector<ProbVector> rows_;
};

struct PromptSample {
  std::vector<std::size_t> indices;  // one candidate index per position
  std::vector<std::string> tokens;   // resolved candidate strings (may be empty)
  double log_prob = 0.0;
};

PromptSample sample(const PromptDistribution& dist, Rng& rng);
PromptSample sample(const PromptDistribution& dist, Rng& rng,
                    const CandidateVocabulary& vocab);

// Score-function matrix for one sample: row i holds +1/p at the sampled
// index and -1/p elsewhere, with p the floored row probability of the
// sampled index.
ScoreMatrix score(const PromptDistribution& dist, const PromptSample& sample);

// Most likely token per position (row argmax, ties to the lowest index).
std::vector<std::string> argmax_prompt(const PromptDistribution& dist,
                                       const CandidateVocabulary& vocab);

enum class OptimizerKind { projected_sgd, projected_adam };

const char* optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::projected_sgd;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// First/second moment accumulators for projected_adam; sized lazily on the
// first update.
struct OptimizerState {
  RowMatrix m;
  RowMatrix v;
  std::uint64_t step = 0;
};

// Gradient step on every row followed by projection back onto the simplex.
void apply_update(PromptDistribution& dist, const GradientEstimate& grad,
                  const OptimizerConfig& config, OptimizerState& state);

}  // namespace promptpg
