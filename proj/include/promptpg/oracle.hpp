#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "promptpg/dataset.hpp"

namespace promptpg {

// Maps class indices to dataset label strings and label words, and renders
// inputs into query text via the template ({text}/{text_a}/{text_b}; a
// {mask} placeholder is passed through untouched).
struct Verbalizer {
  std::vector<std::string> labels;
  std::vector<std::vector<std::string>> label_words;
  std::string template_text = "{text}";

  void validate() const;
  std::size_t num_classes() const { return labels.size(); }
  std::size_t class_of_label(const std::string& label) const;
  std::string render(const Example& example) const;

  // Label words flattened in class order, and the per-class word counts.
  std::vector<std::string> flat_words() const;
  std::vector<std::size_t> class_word_counts() const;

  void save(const std::filesystem::path& path) const;
  static Verbalizer load(const std::filesystem::path& path);
};

enum class Placement { prefix, suffix, infix };

const char* placement_name(Placement p);
Placement parse_placement(const std::string& name);

struct Query {
  std::string text;
  std::vector<std::string> prompt_tokens;
  Placement placement = Placement::prefix;
};

// Joins prompt tokens with single spaces and splices them around the
// rendered input; infix inserts at the floor(m/2) whitespace boundary.
Query make_query(std::span<const std::string> prompt_tokens,
                 const std::string& rendered_input, Placement placement);

// Per-class scores with softmax-normalized probabilities.
class ClassScores {
 public:
  static ClassScores from_raw(std::vector<double> raw);

  const std::vector<double>& raw() const { return raw_; }
  const std::vector<double>& probs() const { return probs_; }
  std::size_t num_classes() const { return raw_.size(); }
  std::size_t predicted() const;  // argmax prob, ties to the lowest index

 private:
  std::vector<double> raw_;
  std::vector<double> probs_;
};

// Collapses per-word log probabilities into per-class scores by summing
// word probabilities within each class (log-sum-exp on the raw side).
ClassScores class_scores_from_word_logprobs(
    std::span<const double> word_logprobs,
    std::span<const std::size_t> class_word_counts);

enum class LossKind { cross_entropy, hinge };

const char* loss_name(LossKind k);
LossKind parse_loss(const std::string& name);

// -ln of the true-class probability, floored at 1e-12.
double cross_entropy_loss(const ClassScores& scores, std::size_t label);

// max(0, margin - p_true + max over other classes of p) on probabilities.
double hinge_loss(const ClassScores& scores, std::size_t label,
                  double margin = 1.0);

double compute_loss(LossKind kind, const ClassScores& scores,
                    std::size_t label, double margin = 1.0);

// Thread-safe billed-call accounting: used + reserved never exceeds limit.
class BudgetLedger {
 public:
  explicit BudgetLedger(std::size_t limit, std::size_t used = 0);

  std::size_t limit() const;
  std::size_t used() const;
  std::size_t reserved() const;
  std::size_t remaining() const;

  void reserve(std::size_t units);  // throws BudgetExceeded
  void commit(std::size_t units);
  void release(std::size_t units);

 private:
  mutable std::mutex mu_;
  std::size_t limit_;
  std::size_t used_;
  std::size_t reserved_ = 0;
};

enum class BillingUnit { per_batch, per_example };

const char* billing_name(BillingUnit u);
BillingUnit parse_billing(const std::string& name);

// Scoring backend. predict() reserves budget up front, commits on success
// and releases on failure, so a failed call never consumes budget.
class Oracle {
 public:
  Oracle(BudgetLedger& ledger, BillingUnit billing = BillingUnit::per_batch)
      : ledger_(ledger), billing_(billing) {}
  virtual ~Oracle() = default;

  std::vector<ClassScores> predict(std::span<const Query> queries,
                                   const Verbalizer& verbalizer);

  BudgetLedger& ledger() { return ledger_; }
  BillingUnit billing() const { return billing_; }

 protected:
  virtual std::vector<ClassScores> score_batch(std::span<const Query> queries,
                                               const Verbalizer& verbalizer) = 0;

 private:
  BudgetLedger& ledger_;
  BillingUnit billing_;
};

}  // namespace promptpg
