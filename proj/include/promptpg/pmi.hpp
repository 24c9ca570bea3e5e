#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace promptpg {

struct PmiConfig {
  double sigma = 0.0;          // delimiter when pair PMI < sigma
  std::uint64_t min_freq = 2;  // keep n-grams with frequency >= min_freq
  std::size_t max_vocab = 100;
  std::size_t max_ngram_len = 3;

  void validate() const;
};

// Ranked candidate prompt tokens (n-grams joined with single spaces).
struct CandidateVocabulary {
  struct Entry {
    std::string ngram;
    std::uint64_t frequency = 0;

    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> entries;

  std::size_t size() const { return entries.size(); }
  const std::string& token(std::size_t i) const { return entries[i].ngram; }

  void save(const std::filesystem::path& path) const;
  static CandidateVocabulary load(const std::filesystem::path& path);

  bool operator==(const CandidateVocabulary&) const = default;
};

// Unigram and adjacent-pair counts over a tokenized corpus.
struct CorpusStats {
  std::map<std::string, std::uint64_t> unigrams;
  std::map<std::pair<std::string, std::string>, std::uint64_t> pairs;
  std::uint64_t total_tokens = 0;
  std::uint64_t total_pairs = 0;

  // MLE for seen items; unseen fall back to add-one mass so PMI stays finite.
  double unigram_prob(const std::string& token) const;
  double pair_prob(const std::string& left, const std::string& right) const;
  double pair_pmi(const std::string& left, const std::string& right) const;
};

CorpusStats collect_stats(std::span<const std::vector<std::string>> corpus);

// ln(p_joint / (p_left * p_right)); all probabilities must be in (0, 1].
double pmi(double p_joint, double p_left, double p_right);

// Half-open token spans; a boundary is placed between adjacent tokens whose
// pair PMI is below sigma.
std::vector<std::pair<std::size_t, std::size_t>> segment(
    std::span<const std::string> tokens, const CorpusStats& stats,
    double sigma);

// Counts every contiguous n-gram (length <= max_ngram_len) inside each
// segment, keeps those with frequency >= min_freq, ranks by frequency
// descending (ties lexicographic ascending) and truncates to max_vocab.
CandidateVocabulary build_vocab(std::span<const std::vector<std::string>> corpus,
                                const PmiConfig& config);

// Lowercases ASCII, splits on whitespace, trims surrounding punctuation.
std::vector<std::string> default_tokenize(std::string_view line);

// One corpus line per text line, tokenized with default_tokenize.
std::vector<std::vector<std::string>> load_corpus(
    const std::filesystem::path& path);

}  // namespace promptpg
