#include "promptpg/prompt_model.hpp"

#include <cmath>

#include "promptpg/errors.hpp"
#include "promptpg/kernels.hpp"

namespace promptpg {

PromptDistribution::PromptDistribution(std::vector<ProbVector> rows)
    : rows_(std::move(rows)) {
  if (rows_.empty()) throw InvalidInput("PromptDistribution: no rows");
  const std::size_t n = rows_.front().size();
  if (n < 2) throw InvalidInput("PromptDistribution: vocab size must be >= 2");
  for (const ProbVector& r : rows_)
    if (r.size() != n)
      throw InvalidInput("PromptDistribution: rows differ in size");
}

PromptDistribution PromptDistribution::uniform(std::size_t length,
                                               std::size_t vocab_size) {
  if (length == 0) throw InvalidInput("PromptDistribution: length must be >= 1");
  std::vector<ProbVector> rows;
  rows.reserve(length);
  for (std::size_t i = 0; i < length; ++i)
    rows.push_back(ProbVector::uniform(vocab_size));
  return PromptDistribution(std::move(rows));
}

void PromptDistribution::set_row(std::size_t i, ProbVector row) {
  if (i >= rows_.size()) throw InvalidInput("set_row: index out of range");
  if (row.size() != vocab_size())
    throw InvalidInput("set_row: size mismatch");
  rows_[i] = std::move(row);
}

PromptSample sample(const PromptDistribution& dist, Rng& rng) {
  PromptSample s;
  s.indices.reserve(dist.length());
  for (std::size_t i = 0; i < dist.length(); ++i) {
    const ProbVector& row = dist.row(i);
    const std::size_t j = rng.categorical(row.span());
    s.indices.push_back(j);
    s.log_prob += std::log(std::max(row[j], 1e-300));
  }
  return s;
}

PromptSample sample(const PromptDistribution& dist, Rng& rng,
                    const CandidateVocabulary& vocab) {
  if (vocab.size() != dist.vocab_size())
    throw InvalidInput("sample: vocabulary size mismatch");
  PromptSample s = sample(dist, rng);
  s.tokens.reserve(s.indices.size());
  for (std::size_t j : s.indices) s.tokens.push_back(vocab.token(j));
  return s;
}

ScoreMatrix score(const PromptDistribution& dist, const PromptSample& sample) {
  if (sample.indices.size() != dist.length())
    throw InvalidInput("score: sample length mismatch");
  ScoreMatrix out(dist.length(), dist.vocab_size());
  for (std::size_t i = 0; i < dist.length(); ++i) {
    const std::size_t j = sample.indices[i];
    if (j >= dist.vocab_size())
      throw InvalidInput("score: sampled index out of range");
    const double p = std::max(dist.row(i)[j], kScoreProbFloor);
    const double inv = 1.0 / p;
    auto row = out.row(i);
    for (double& x : row) x = -inv;
    row[j] = inv;
  }
  return out;
}

std::vector<std::string> argmax_prompt(const PromptDistribution& dist,
                                       const CandidateVocabulary& vocab) {
  if (vocab.size() != dist.vocab_size())
    throw InvalidInput("argmax_prompt: vocabulary size mismatch");
  std::vector<std::string> tokens;
  tokens.reserve(dist.length());
  for (std::size_t i = 0; i < dist.length(); ++i)
    tokens.push_back(vocab.token(dist.row(i).argmax()));
  return tokens;
}

const char* optimizer_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::projected_sgd:
      return "projected_sgd";
    case OptimizerKind::projected_adam:
      return "projected_adam";
  }
  return "?";
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "projected_sgd") return OptimizerKind::projected_sgd;
  if (name == "projected_adam") return OptimizerKind::projected_adam;
  throw ConfigError("unknown optimizer: " + name);
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw ConfigError("optimizer: learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("optimizer: betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("optimizer: epsilon must be positive");
}

void apply_update(PromptDistribution& dist, const GradientEstimate& grad,
                  const OptimizerConfig& config, OptimizerState& state) {
  config.validate();
  const std::size_t n = dist.length();
  const std::size_t N = dist.vocab_size();
  if (grad.rows() != n || grad.cols() != N)
    throw InvalidInput("apply_update: gradient shape mismatch");

  std::vector<double> z(N);
  if (config.kind == OptimizerKind::projected_sgd) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = dist.row(i).values();
      const auto g = grad.row(i);
      for (std::size_t j = 0; j < N; ++j)
        z[j] = p[j] - config.learning_rate * g[j];
      dist.set_row(i, simplex::project(z));
    }
    return;
  }

  if (state.m.rows() != n || state.m.cols() != N) {
    if (state.step != 0)
      throw InvalidInput("apply_update: optimizer state shape mismatch");
    state.m = RowMatrix(n, N);
    state.v = RowMatrix(n, N);
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = dist.row(i).values();
    const auto g = grad.row(i);
    auto m = state.m.row(i);
    auto v = state.v.row(i);
    for (std::size_t j = 0; j < N; ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      z[j] = p[j] - config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
    dist.set_row(i, simplex::project(z));
  }
}

}  // namespace promptpg
