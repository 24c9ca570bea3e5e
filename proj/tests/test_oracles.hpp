#pragma once

// Independent reference implementations used to check the library. These
// deliberately avoid the library's own kernels and solvers: the projection
// check enumerates KKT clamp patterns instead of bisecting, the estimator
// checks enumerate every outcome exactly, and the planted-task check
// scores prompts by brute force.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "promptpg/dataset.hpp"
#include "promptpg/matrix.hpp"
#include "promptpg/planted.hpp"
#include "promptpg/prompt_model.hpp"

namespace testoracle {

// ---- Projection via KKT clamp-pattern enumeration ----------------------
//
// For p = argmin ||p - z|| over the simplex with box [0,1], stationarity
// gives p_j = min(1, max(0, z_j - v)). Each coordinate is clamped low,
// clamped high, or free; try all 3^n assignments and keep the consistent
// one.

inline std::optional<std::vector<double>> kkt_project(
    std::span<const double> z) {
  const std::size_t n = z.size();
  std::vector<int> state(n, 0);  // 0 = zero, 1 = free, 2 = one
  for (;;) {
    double free_sum = 0.0;
    std::size_t n_free = 0;
    std::size_t n_one = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (state[j] == 1) {
        free_sum += z[j];
        ++n_free;
      } else if (state[j] == 2) {
        ++n_one;
      }
    }

    bool feasible = static_cast<double>(n_one) <= 1.0;
    double v = 0.0;
    if (n_free > 0) {
      v = (free_sum - (1.0 - static_cast<double>(n_one))) /
          static_cast<double>(n_free);
    } else if (n_one == 1) {
      // All mass on one clamped-high coordinate; any v in the valid band
      // yields the same point.
      double upper = 1e300;  // v <= z_j - 1 for the high coordinate
      double lower = -1e300;
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == 2)
          upper = std::min(upper, z[j] - 1.0);
        else
          lower = std::max(lower, z[j]);
      }
      feasible = feasible && lower <= upper + 1e-12;
      v = upper;
    } else {
      feasible = false;  // mass cannot sum to 1
    }

    if (feasible) {
      const double slack = 1e-9;
      for (std::size_t j = 0; j < n && feasible; ++j) {
        const double t = z[j] - v;
        if (state[j] == 0) feasible = t <= slack;
        if (state[j] == 1) feasible = t >= -slack && t <= 1.0 + slack;
        if (state[j] == 2) feasible = t >= 1.0 - slack;
      }
    }
    if (feasible) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j)
        p[j] = std::min(1.0, std::max(0.0, z[j] - v));
      double s = 0.0;
      for (double x : p) s += x;
      if (std::abs(s - 1.0) <= 1e-6) {
        for (double& x : p) x /= s;
        return p;
      }
    }

    std::size_t j = 0;
    while (j < n && state[j] == 2) state[j++] = 0;
    if (j == n) return std::nullopt;
    ++state[j];
  }
}

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// ---- Exact enumeration of the gradient estimators ----------------------

inline std::vector<std::vector<std::size_t>> all_index_tuples(std::size_t n,
                                                              std::size_t N) {
  std::vector<std::vector<std::size_t>> tuples;
  std::vector<std::size_t> t(n, 0);
  for (;;) {
    tuples.push_back(t);
    std::size_t i = 0;
    while (i < n && ++t[i] == N) t[i++] = 0;
    if (i == n) break;
  }
  return tuples;
}

inline double tuple_prob(const promptpg::PromptDistribution& dist,
                         std::span<const std::size_t> tuple) {
  double p = 1.0;
  for (std::size_t i = 0; i < tuple.size(); ++i) p *= dist.row(i)[tuple[i]];
  return p;
}

// Hand-rolled score matrix: +1/max(p, floor) at the drawn index, the
// negation elsewhere.
inline promptpg::RowMatrix hand_score(const promptpg::PromptDistribution& dist,
                                      std::span<const std::size_t> tuple) {
  promptpg::RowMatrix s(dist.length(), dist.vocab_size());
  for (std::size_t i = 0; i < dist.length(); ++i) {
    const double p = std::max(dist.row(i)[tuple[i]], 1e-6);
    for (std::size_t j = 0; j < dist.vocab_size(); ++j)
      s.at(i, j) = j == tuple[i] ? 1.0 / p : -1.0 / p;
  }
  return s;
}

inline double expected_loss(const promptpg::PromptDistribution& dist,
                            std::span<const double> tuple_losses) {
  const auto tuples = all_index_tuples(dist.length(), dist.vocab_size());
  double e = 0.0;
  for (std::size_t t = 0; t < tuples.size(); ++t)
    e += tuple_prob(dist, tuples[t]) * tuple_losses[t];
  return e;
}

// sum over outcomes of P(T) * L(T) * score(T).
inline promptpg::RowMatrix loss_score_sum(
    const promptpg::PromptDistribution& dist,
    std::span<const double> tuple_losses) {
  const auto tuples = all_index_tuples(dist.length(), dist.vocab_size());
  promptpg::RowMatrix out(dist.length(), dist.vocab_size());
  for (std::size_t t = 0; t < tuples.size(); ++t) {
    const double w = tuple_prob(dist, tuples[t]) * tuple_losses[t];
    const promptpg::RowMatrix s = hand_score(dist, tuples[t]);
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j)
        out.at(i, j) += w * s.at(i, j);
  }
  return out;
}

// sum over outcomes of P(T) * score(T).
inline promptpg::RowMatrix expected_score(
    const promptpg::PromptDistribution& dist) {
  const auto tuples = all_index_tuples(dist.length(), dist.vocab_size());
  promptpg::RowMatrix out(dist.length(), dist.vocab_size());
  for (const auto& tuple : tuples) {
    const double w = tuple_prob(dist, tuple);
    const promptpg::RowMatrix s = hand_score(dist, tuple);
    for (std::size_t i = 0; i < out.rows(); ++i)
      for (std::size_t j = 0; j < out.cols(); ++j)
        out.at(i, j) += w * s.at(i, j);
  }
  return out;
}

// Probability-weighted average of an estimator over every ordered
// combination of sample outcomes. The estimator is handed the drawn tuples
// and their losses and returns a gradient matrix.
inline promptpg::RowMatrix enumerate_estimator_mean(
    const promptpg::PromptDistribution& dist,
    std::span<const double> tuple_losses, std::size_t num_samples,
    const std::function<promptpg::RowMatrix(
        const std::vector<std::vector<std::size_t>>&,
        const std::vector<double>&)>& estimator) {
  const auto tuples = all_index_tuples(dist.length(), dist.vocab_size());
  const std::size_t M = tuples.size();

  promptpg::RowMatrix mean(dist.length(), dist.vocab_size());
  std::vector<std::size_t> pick(num_samples, 0);
  for (;;) {
    double prob = 1.0;
    std::vector<std::vector<std::size_t>> drawn;
    std::vector<double> losses;
    for (std::size_t k : pick) {
      prob *= tuple_prob(dist, tuples[k]);
      drawn.push_back(tuples[k]);
      losses.push_back(tuple_losses[k]);
    }
    const promptpg::RowMatrix g = estimator(drawn, losses);
    for (std::size_t i = 0; i < mean.rows(); ++i)
      for (std::size_t j = 0; j < mean.cols(); ++j)
        mean.at(i, j) += prob * g.at(i, j);

    std::size_t i = 0;
    while (i < num_samples && ++pick[i] == M) pick[i++] = 0;
    if (i == num_samples) break;
  }
  return mean;
}

// ---- Brute-force planted-task scoring ----------------------------------

inline std::vector<double> planted_raw_scores(
    const promptpg::PlantedTaskSpec& spec,
    std::span<const std::string> prompt_tokens, const promptpg::Example& ex) {
  std::vector<double> scores = spec.default_base;
  const auto it = spec.base_scores.find(ex.text_a);
  if (it != spec.base_scores.end()) scores = it->second;
  for (std::size_t c = 0; c < spec.num_classes; ++c)
    for (const std::string& planted : spec.planted[c])
      for (const std::string& tok : prompt_tokens)
        if (tok == planted) scores[c] += spec.weight;
  return scores;
}

inline double planted_example_loss(const promptpg::PlantedTaskSpec& spec,
                                   std::span<const std::string> prompt_tokens,
                                   const promptpg::Example& ex, bool hinge,
                                   double margin = 1.0) {
  const std::vector<double> raw = planted_raw_scores(spec, prompt_tokens, ex);
  const double mx = *std::max_element(raw.begin(), raw.end());
  double total = 0.0;
  std::vector<double> probs(raw.size());
  for (std::size_t c = 0; c < raw.size(); ++c) {
    probs[c] = std::exp(raw[c] - mx);
    total += probs[c];
  }
  for (double& p : probs) p /= total;
  const std::size_t y = static_cast<std::size_t>(std::stoul(ex.label));
  if (!hinge) return -std::log(std::max(probs[y], 1e-12));
  double best_other = -1.0;
  for (std::size_t c = 0; c < probs.size(); ++c)
    if (c != y) best_other = std::max(best_other, probs[c]);
  return std::max(0.0, margin - probs[y] + best_other);
}

inline double planted_prompt_loss(const promptpg::PlantedTaskSpec& spec,
                                  std::span<const std::string> prompt_tokens,
                                  const promptpg::Dataset& data, bool hinge,
                                  double margin = 1.0) {
  double total = 0.0;
  for (const promptpg::Example& ex : data)
    total += planted_example_loss(spec, prompt_tokens, ex, hinge, margin);
  return total / static_cast<double>(data.size());
}

struct PlantedOptimum {
  double loss = 0.0;
  std::vector<std::string> prompt;
};

// Minimum mean loss over every possible prompt (vocab_size^length of them).
inline PlantedOptimum enumerate_planted_optimum(
    const promptpg::PlantedTaskSpec& spec,
    const promptpg::CandidateVocabulary& vocab, std::size_t prompt_length,
    const promptpg::Dataset& data, bool hinge, double margin = 1.0) {
  PlantedOptimum best;
  best.loss = 1e300;
  std::vector<std::size_t> pick(prompt_length, 0);
  for (;;) {
    std::vector<std::string> prompt;
    prompt.reserve(prompt_length);
    for (std::size_t j : pick) prompt.push_back(vocab.token(j));
    const double loss = planted_prompt_loss(spec, prompt, data, hinge, margin);
    if (loss < best.loss) {
      best.loss = loss;
      best.prompt = prompt;
    }
    std::size_t i = 0;
    while (i < prompt_length && ++pick[i] == vocab.size()) pick[i++] = 0;
    if (i == prompt_length) break;
  }
  return best;
}

}  // namespace testoracle
