#include "promptpg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "promptpg/errors.hpp"

namespace promptpg {

namespace {

void replace_all(std::string& text, const std::string& needle,
                 const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
}

std::vector<std::string> whitespace_split(const std::string& text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    std::size_t j = i;
    while (j < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    if (j > i) words.push_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string join_words(std::span<const std::string> words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace

void Verbalizer::validate() const {
  if (labels.size() < 2) throw ConfigError("verbalizer: need >= 2 labels");
  if (label_words.size() != labels.size())
    throw ConfigError("verbalizer: label_words/labels size mismatch");
  std::set<std::string> seen_labels(labels.begin(), labels.end());
  if (seen_labels.size() != labels.size())
    throw ConfigError("verbalizer: duplicate labels");
  std::set<std::string> seen_words;
  for (const auto& words : label_words) {
    if (words.empty())
      throw ConfigError("verbalizer: every class needs >= 1 label word");
    for (const auto& w : words) {
      if (w.empty()) throw ConfigError("verbalizer: empty label word");
      if (!seen_words.insert(w).second)
        throw ConfigError("verbalizer: label word used twice: " + w);
    }
  }
  if (template_text.find("{text}") == std::string::npos &&
      template_text.find("{text_a}") == std::string::npos)
    throw ConfigError("verbalizer: template must contain {text} or {text_a}");
}

std::size_t Verbalizer::class_of_label(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end())
    throw InvalidInput("verbalizer: unknown label: " + label);
  return static_cast<std::size_t>(it - labels.begin());
}

std::string Verbalizer::render(const Example& example) const {
  std::string out = template_text;
  replace_all(out, "{text}", example.text_a);
  replace_all(out, "{text_a}", example.text_a);
  replace_all(out, "{text_b}", example.text_b);
  return out;
}

std::vector<std::string> Verbalizer::flat_words() const {
  std::vector<std::string> out;
  for (const auto& words : label_words)
    out.insert(out.end(), words.begin(), words.end());
  return out;
}

std::vector<std::size_t> Verbalizer::class_word_counts() const {
  std::vector<std::size_t> out;
  out.reserve(label_words.size());
  for (const auto& words : label_words) out.push_back(words.size());
  return out;
}

void Verbalizer::save(const std::filesystem::path& path) const {
  validate();
  nlohmann::ordered_json j;
  j["labels"] = labels;
  j["label_words"] = label_words;
  j["template"] = template_text;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write verbalizer file: " + path.string());
  out << j.dump(2) << '\n';
}

Verbalizer Verbalizer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read verbalizer file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("verbalizer: invalid JSON in " + path.string() + ": " +
                      e.what());
  }
  Verbalizer v;
  try {
    j.at("labels").get_to(v.labels);
    j.at("label_words").get_to(v.label_words);
    if (j.contains("template")) j.at("template").get_to(v.template_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("verbalizer: bad fields in " + path.string() + ": " +
                      e.what());
  }
  v.validate();
  return v;
}

const char* placement_name(Placement p) {
  switch (p) {
    case Placement::prefix:
      return "prefix";
    case Placement::suffix:
      return "suffix";
    case Placement::infix:
      return "infix";
  }
  return "?";
}

Placement parse_placement(const std::string& name) {
  for (Placement p : {Placement::prefix, Placement::suffix, Placement::infix})
    if (name == placement_name(p)) return p;
  throw ConfigError("unknown placement: " + name);
}

Query make_query(std::span<const std::string> prompt_tokens,
                 const std::string& rendered_input, Placement placement) {
  Query q;
  q.prompt_tokens.assign(prompt_tokens.begin(), prompt_tokens.end());
  q.placement = placement;
  const std::string joined = join_words(prompt_tokens);
  if (joined.empty()) {
    q.text = rendered_input;
    return q;
  }
  if (rendered_input.empty()) {
    q.text = joined;
    return q;
  }
  switch (placement) {
    case Placement::prefix:
      q.text = joined + ' ' + rendered_input;
      break;
    case Placement::suffix:
      q.text = rendered_input + ' ' + joined;
      break;
    case Placement::infix: {
      const auto words = whitespace_split(rendered_input);
      const std::size_t half = words.size() / 2;
      std::string left = join_words(std::span(words).subspan(0, half));
      std::string right = join_words(std::span(words).subspan(half));
      q.text = left;
      if (!left.empty()) q.text += ' ';
      q.text += joined;
      if (!right.empty()) {
        q.text += ' ';
        q.text += right;
      }
      break;
    }
  }
  return q;
}

ClassScores ClassScores::from_raw(std::vector<double> raw) {
  if (raw.size() < 2)
    throw InvalidInput("class scores: need >= 2 classes");
  for (double r : raw)
    if (!std::isfinite(r))
      throw InvalidInput("class scores: non-finite score");
  ClassScores s;
  s.raw_ = std::move(raw);
  const double mx = *std::max_element(s.raw_.begin(), s.raw_.end());
  s.probs_.resize(s.raw_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.raw_.size(); ++i) {
    s.probs_[i] = std::exp(s.raw_[i] - mx);
    total += s.probs_[i];
  }
  for (double& p : s.probs_) p /= total;
  return s;
}

std::size_t ClassScores::predicted() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs_.size(); ++i)
    if (probs_[i] > probs_[best]) best = i;
  return best;
}

ClassScores class_scores_from_word_logprobs(
    std::span<const double> word_logprobs,
    std::span<const std::size_t> class_word_counts) {
  std::size_t expected = 0;
  for (std::size_t c : class_word_counts) {
    if (c == 0)
      throw InvalidInput("class scores: class with zero label words");
    expected += c;
  }
  if (word_logprobs.size() != expected)
    throw InvalidInput("class scores: word score count mismatch");
  for (double s : word_logprobs)
    if (!std::isfinite(s))
      throw InvalidInput("class scores: non-finite word score");

  const double mx =
      *std::max_element(word_logprobs.begin(), word_logprobs.end());
  std::vector<double> raw;
  raw.reserve(class_word_counts.size());
  std::size_t offset = 0;
  for (std::size_t c : class_word_counts) {
    if (c == 1) {
      // Exact for single-word classes; log(exp(x)) would cost an ulp.
      raw.push_back(word_logprobs[offset]);
    } else {
      double mass = 0.0;
      for (std::size_t k = 0; k < c; ++k)
        mass += std::exp(word_logprobs[offset + k] - mx);
      raw.push_back(mx + std::log(mass));
    }
    offset += c;
  }
  return ClassScores::from_raw(std::move(raw));
}

const char* loss_name(LossKind k) {
  switch (k) {
    case LossKind::cross_entropy:
      return "ce";
    case LossKind::hinge:
      return "hinge";
  }
  return "?";
}

LossKind parse_loss(const std::string& name) {
  if (name == "ce" || name == "cross_entropy") return LossKind::cross_entropy;
  if (name == "hinge") return LossKind::hinge;
  throw ConfigError("unknown loss: " + name);
}

double cross_entropy_loss(const ClassScores& scores, std::size_t label) {
  if (label >= scores.num_classes())
    throw InvalidInput("loss: label out of range");
  return -std::log(std::max(scores.probs()[label], 1e-12));
}

double hinge_loss(const ClassScores& scores, std::size_t label, double margin) {
  if (label >= scores.num_classes())
    throw InvalidInput("loss: label out of range");
  if (!(margin > 0.0)) throw InvalidInput("loss: margin must be positive");
  const auto& p = scores.probs();
  double best_other = -1.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (i != label) best_other = std::max(best_other, p[i]);
  return std::max(0.0, margin - p[label] + best_other);
}

double compute_loss(LossKind kind, const ClassScores& scores,
                    std::size_t label, double margin) {
  switch (kind) {
    case LossKind::cross_entropy:
      return cross_entropy_loss(scores, label);
    case LossKind::hinge:
      return hinge_loss(scores, label, margin);
  }
  throw InvalidInput("loss: unknown kind");
}

BudgetLedger::BudgetLedger(std::size_t limit, std::size_t used)
    : limit_(limit), used_(used) {
  if (used_ > limit_)
    throw InvalidInput("budget ledger: used exceeds limit");
}

std::size_t BudgetLedger::limit() const {
  std::lock_guard lock(mu_);
  return limit_;
}

std::size_t BudgetLedger::used() const {
  std::lock_guard lock(mu_);
  return used_;
}

std::size_t BudgetLedger::reserved() const {
  std::lock_guard lock(mu_);
  return reserved_;
}

std::size_t BudgetLedger::remaining() const {
  std::lock_guard lock(mu_);
  return limit_ - used_ - reserved_;
}

void BudgetLedger::reserve(std::size_t units) {
  std::lock_guard lock(mu_);
  if (used_ + reserved_ + units > limit_)
    throw BudgetExceeded("budget exceeded: " + std::to_string(used_) +
                         " used + " + std::to_string(reserved_) +
                         " reserved + " + std::to_string(units) +
                         " requested > limit " + std::to_string(limit_));
  reserved_ += units;
}

void BudgetLedger::commit(std::size_t units) {
  std::lock_guard lock(mu_);
  if (units > reserved_)
    throw InvalidInput("budget ledger: commit exceeds reservation");
  reserved_ -= units;
  used_ += units;
}

void BudgetLedger::release(std::size_t units) {
  std::lock_guard lock(mu_);
  if (units > reserved_)
    throw InvalidInput("budget ledger: release exceeds reservation");
  reserved_ -= units;
}

const char* billing_name(BillingUnit u) {
  switch (u) {
    case BillingUnit::per_batch:
      return "per_batch";
    case BillingUnit::per_example:
      return "per_example";
  }
  return "?";
}

BillingUnit parse_billing(const std::string& name) {
  if (name == "per_batch") return BillingUnit::per_batch;
  if (name == "per_example") return BillingUnit::per_example;
  throw ConfigError("unknown billing unit: " + name);
}

std::vector<ClassScores> Oracle::predict(std::span<const Query> queries,
                                         const Verbalizer& verbalizer) {
  if (queries.empty()) return {};
  const std::size_t units =
      billing_ == BillingUnit::per_batch ? 1 : queries.size();
  ledger_.reserve(units);
  std::vector<ClassScores> scores;
  try {
    scores = score_batch(queries, verbalizer);
    if (scores.size() != queries.size())
      throw OracleUnavailable("oracle returned wrong number of scores");
    for (const ClassScores& s : scores)
      if (s.num_classes() != verbalizer.num_classes())
        throw OracleUnavailable("oracle returned wrong class count");
  } catch (...) {
    ledger_.release(units);
    throw;
  }
  ledger_.commit(units);
  return scores;
}

}  // namespace promptpg
