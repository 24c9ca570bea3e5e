#include "promptpg/planted.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "promptpg/errors.hpp"

namespace promptpg {

void PlantedTaskSpec::validate() const {
  if (num_classes < 2)
    throw InvalidInput("planted task: need >= 2 classes");
  if (!std::isfinite(weight))
    throw InvalidInput("planted task: weight must be finite");
  if (planted.size() != num_classes)
    throw InvalidInput("planted task: planted lists/classes mismatch");
  bool any = false;
  for (const auto& tokens : planted)
    for (const auto& t : tokens) {
      if (t.empty()) throw InvalidInput("planted task: empty planted token");
      any = true;
    }
  if (!any)
    throw InvalidInput("planted task: every planted set is empty");
  if (default_base.size() != num_classes)
    throw InvalidInput("planted task: default_base size mismatch");
  for (double b : default_base)
    if (!std::isfinite(b))
      throw InvalidInput("planted task: non-finite base score");
  for (const auto& [input, base] : base_scores) {
    if (input.empty()) throw InvalidInput("planted task: empty input key");
    if (base.size() != num_classes)
      throw InvalidInput("planted task: base score size mismatch for " + input);
    for (double b : base)
      if (!std::isfinite(b))
        throw InvalidInput("planted task: non-finite base score for " + input);
  }
}

std::size_t count_token_occurrences(const std::string& text,
                                    const std::string& token) {
  if (token.empty()) return 0;
  const std::string padded = ' ' + text + ' ';
  const std::string needle = ' ' + token + ' ';
  std::size_t count = 0;
  std::size_t pos = 0;
  while ((pos = padded.find(needle, pos)) != std::string::npos) {
    ++count;
    // Step past the token but keep its trailing space as the next
    // occurrence's leading boundary.
    pos += needle.size() - 1;
  }
  return count;
}

std::vector<double> PlantedTaskSpec::class_scores_for(
    const std::string& query_text) const {
  const std::vector<double>* base = &default_base;
  for (const auto& [input, scores] : base_scores) {
    if (query_text.find(input) != std::string::npos) {
      base = &scores;
      break;
    }
  }
  std::vector<double> out = *base;
  for (std::size_t c = 0; c < num_classes; ++c)
    for (const auto& token : planted[c])
      out[c] += weight *
                static_cast<double>(count_token_occurrences(query_text, token));
  return out;
}

void PlantedTaskSpec::save(const std::filesystem::path& path) const {
  validate();
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["num_classes"] = num_classes;
  j["weight"] = weight;
  j["planted"] = planted;
  j["default_base"] = default_base;
  j["base_scores"] = base_scores;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write planted spec: " + path.string());
  out << j.dump(2) << '\n';
}

PlantedTaskSpec PlantedTaskSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read planted spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("planted spec: invalid JSON in " + path.string() + ": " +
                      e.what());
  }
  PlantedTaskSpec spec;
  try {
    if (j.value("version", 1) != 1)
      throw ConfigError("planted spec: unsupported version");
    j.at("num_classes").get_to(spec.num_classes);
    j.at("weight").get_to(spec.weight);
    j.at("planted").get_to(spec.planted);
    j.at("default_base").get_to(spec.default_base);
    if (j.contains("base_scores")) j.at("base_scores").get_to(spec.base_scores);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("planted spec: bad fields in " + path.string() + ": " +
                      e.what());
  }
  spec.validate();
  return spec;
}

PlantedOracle::PlantedOracle(PlantedTaskSpec spec, BudgetLedger& ledger,
                             BillingUnit billing)
    : Oracle(ledger, billing), spec_(std::move(spec)) {
  spec_.validate();
}

std::vector<ClassScores> PlantedOracle::score_batch(
    std::span<const Query> queries, const Verbalizer& verbalizer) {
  if (verbalizer.num_classes() != spec_.num_classes)
    throw InvalidInput("planted oracle: verbalizer class count mismatch");
  std::vector<ClassScores> out;
  out.reserve(queries.size());
  for (const Query& q : queries)
    out.push_back(ClassScores::from_raw(spec_.class_scores_for(q.text)));
  return out;
}

void PlantedTaskParams::validate() const {
  if (prompt_length == 0)
    throw InvalidInput("planted task: prompt_length must be >= 1");
  if (vocab_size < 2)
    throw InvalidInput("planted task: vocab_size must be >= 2");
  if (shots == 0) throw InvalidInput("planted task: shots must be >= 1");
  if (!(signal > 0.0))
    throw InvalidInput("planted task: signal must be positive");
  if (!(weight > 0.0))
    throw InvalidInput("planted task: weight must be positive");
  if (input_prefix.empty() ||
      input_prefix.find(' ') != std::string::npos)
    throw InvalidInput("planted task: bad input prefix");
}

PlantedTask make_planted_task(const PlantedTaskParams& params) {
  params.validate();
  PlantedTask task;

  const double m =
      static_cast<double>(params.prompt_length) * params.weight;
  task.spec.num_classes = 2;
  task.spec.weight = params.weight;
  task.spec.planted = {{"keystone"}, {"counterweight"}};
  task.spec.default_base = {0.0, 0.0};

  for (std::size_t i = 0; i + 2 < params.vocab_size; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "fil%02zu", i);
    task.vocab.entries.push_back({buf, 2});
  }
  task.vocab.entries.push_back({"keystone", 2});
  task.vocab.entries.push_back({"counterweight", 2});

  task.verbalizer.labels = {"0", "1"};
  task.verbalizer.label_words = {{"bad"}, {"good"}};
  task.verbalizer.template_text = "{text}";
  task.verbalizer.validate();

  std::size_t next_id = 0;
  auto add_examples = [&](Dataset& split, std::size_t per_class) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t label = 0; label < 2; ++label) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%03zu", params.input_prefix.c_str(),
                      next_id++);
        split.push_back({std::to_string(label), buf, ""});
        task.spec.base_scores[buf] =
            label == 0 ? std::vector<double>{params.signal - m, 0.0}
                       : std::vector<double>{-m, params.signal};
      }
    }
  };
  add_examples(task.train_pool, 2 * params.shots);
  add_examples(task.test, params.test_per_class);
  // Fixed-width ids keep every id from being a substring of another; more
  // than 999 would break that and confuse the base-score lookup.
  if (next_id > 999)
    throw InvalidInput("planted task: too many examples for fixed-width ids");

  task.spec.validate();
  return task;
}

}  // namespace promptpg
