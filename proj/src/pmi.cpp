#include "promptpg/pmi.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include "promptpg/errors.hpp"

namespace promptpg {

namespace {

constexpr std::string_view kVocabHeader = "# promptpg-vocab v1";

std::string join_tokens(std::span<const std::string> tokens, std::size_t begin,
                        std::size_t len) {
  std::string out = tokens[begin];
  for (std::size_t i = 1; i < len; ++i) {
    out += ' ';
    out += tokens[begin + i];
  }
  return out;
}

}  // namespace

void PmiConfig::validate() const {
  if (!std::isfinite(sigma)) throw ConfigError("pmi: sigma must be finite");
  if (min_freq == 0) throw ConfigError("pmi: min_freq must be >= 1");
  if (max_vocab == 0) throw ConfigError("pmi: max_vocab must be >= 1");
  if (max_ngram_len == 0) throw ConfigError("pmi: max_ngram_len must be >= 1");
}

void CandidateVocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write vocabulary file: " + path.string());
  out << kVocabHeader << '\n';
  for (const Entry& e : entries) out << e.frequency << '\t' << e.ngram << '\n';
  if (!out) throw IoError("failed writing vocabulary file: " + path.string());
}

CandidateVocabulary CandidateVocabulary::load(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read vocabulary file: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kVocabHeader)
    throw IoError("vocabulary file missing '" + std::string(kVocabHeader) +
                  "' header: " + path.string());
  CandidateVocabulary vocab;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw IoError("malformed vocabulary line: " + line);
    Entry e;
    const char* first = line.data();
    const auto [ptr, ec] = std::from_chars(first, first + tab, e.frequency);
    if (ec != std::errc() || ptr != first + tab)
      throw IoError("malformed vocabulary frequency: " + line);
    e.ngram = line.substr(tab + 1);
    if (e.ngram.empty()) throw IoError("empty vocabulary n-gram: " + line);
    vocab.entries.push_back(std::move(e));
  }
  return vocab;
}

double CorpusStats::unigram_prob(const std::string& token) const {
  if (total_tokens == 0) throw InvalidInput("pmi: empty corpus stats");
  const auto it = unigrams.find(token);
  if (it == unigrams.end())
    return 1.0 / static_cast<double>(total_tokens + 1);
  return static_cast<double>(it->second) / static_cast<double>(total_tokens);
}

double CorpusStats::pair_prob(const std::string& left,
                              const std::string& right) const {
  if (total_pairs == 0) return 1.0 / static_cast<double>(total_pairs + 1);
  const auto it = pairs.find({left, right});
  if (it == pairs.end()) return 1.0 / static_cast<double>(total_pairs + 1);
  return static_cast<double>(it->second) / static_cast<double>(total_pairs);
}

double CorpusStats::pair_pmi(const std::string& left,
                             const std::string& right) const {
  return pmi(pair_prob(left, right), unigram_prob(left), unigram_prob(right));
}

CorpusStats collect_stats(std::span<const std::vector<std::string>> corpus) {
  CorpusStats stats;
  for (const auto& tokens : corpus) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].empty()) throw InvalidInput("pmi: empty token");
      ++stats.unigrams[tokens[i]];
      ++stats.total_tokens;
      if (i + 1 < tokens.size()) {
        ++stats.pairs[{tokens[i], tokens[i + 1]}];
        ++stats.total_pairs;
      }
    }
  }
  return stats;
}

double pmi(double p_joint, double p_left, double p_right) {
  for (double p : {p_joint, p_left, p_right})
    if (!(p > 0.0) || p > 1.0)
      throw InvalidInput("pmi: probabilities must be in (0, 1]");
  return std::log(p_joint / (p_left * p_right));
}

std::vector<std::pair<std::size_t, std::size_t>> segment(
    std::span<const std::string> tokens, const CorpusStats& stats,
    double sigma) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  if (tokens.empty()) return spans;
  std::size_t begin = 0;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (stats.pair_pmi(tokens[i], tokens[i + 1]) < sigma) {
      spans.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  spans.emplace_back(begin, tokens.size());
  return spans;
}

CandidateVocabulary build_vocab(std::span<const std::vector<std::string>> corpus,
                                const PmiConfig& config) {
  config.validate();
  const CorpusStats stats = collect_stats(corpus);
  if (stats.total_tokens == 0) throw InvalidInput("pmi: empty corpus");

  std::map<std::string, std::uint64_t> counts;
  for (const auto& tokens : corpus) {
    for (const auto& [begin, end] : segment(tokens, stats, config.sigma)) {
      const std::size_t span_len = end - begin;
      const std::size_t max_len = std::min(config.max_ngram_len, span_len);
      for (std::size_t len = 1; len <= max_len; ++len)
        for (std::size_t start = begin; start + len <= end; ++start)
          ++counts[join_tokens(tokens, start, len)];
    }
  }

  CandidateVocabulary vocab;
  for (const auto& [ngram, freq] : counts)
    if (freq >= config.min_freq) vocab.entries.push_back({ngram, freq});
  std::stable_sort(vocab.entries.begin(), vocab.entries.end(),
                   [](const CandidateVocabulary::Entry& a,
                      const CandidateVocabulary::Entry& b) {
                     if (a.frequency != b.frequency)
                       return a.frequency > b.frequency;
                     return a.ngram < b.ngram;
                   });
  if (vocab.entries.size() > config.max_vocab)
    vocab.entries.resize(config.max_vocab);
  return vocab;
}

std::vector<std::string> default_tokenize(std::string_view line) {
  auto is_trim = [](unsigned char c) {
    return std::ispunct(c) != 0 && c != '\'' && c != '-';
  };
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) {
      std::size_t b = i;
      std::size_t e = j;
      while (b < e && is_trim(static_cast<unsigned char>(line[b]))) ++b;
      while (e > b && is_trim(static_cast<unsigned char>(line[e - 1]))) --e;
      if (e > b) {
        std::string tok(line.substr(b, e - b));
        for (char& c : tok)
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        tokens.push_back(std::move(tok));
      }
    }
    i = j;
  }
  return tokens;
}

std::vector<std::vector<std::string>> load_corpus(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read corpus file: " + path.string());
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = default_tokenize(line);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }
  return corpus;
}

}  // namespace promptpg
