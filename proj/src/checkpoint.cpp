#include "promptpg/checkpoint.hpp"

#include <charconv>
#include <fstream>

#include "promptpg/errors.hpp"

namespace promptpg {

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw CheckpointError("malformed probability value: " + text);
  return value;
}

void Checkpoint::set_distribution(const PromptDistribution& dist) {
  rows.clear();
  rows.reserve(dist.length());
  for (std::size_t i = 0; i < dist.length(); ++i) {
    std::vector<std::string> row;
    row.reserve(dist.vocab_size());
    for (double p : dist.row(i).values()) row.push_back(format_double(p));
    rows.push_back(std::move(row));
  }
}

PromptDistribution Checkpoint::distribution() const {
  std::vector<ProbVector> parsed;
  parsed.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> values;
    values.reserve(row.size());
    for (const auto& s : row) values.push_back(parse_double(s));
    try {
      parsed.emplace_back(std::move(values));
    } catch (const InvalidInput& e) {
      throw CheckpointError(std::string("invalid row probabilities: ") +
                            e.what());
    }
  }
  try {
    return PromptDistribution(std::move(parsed));
  } catch (const InvalidInput& e) {
    throw CheckpointError(std::string("invalid distribution: ") + e.what());
  }
}

nlohmann::ordered_json Checkpoint::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["config"] = config.to_json();
  nlohmann::ordered_json vocab_json = nlohmann::ordered_json::array();
  for (const auto& e : vocab.entries) {
    nlohmann::ordered_json entry;
    entry["ngram"] = e.ngram;
    entry["frequency"] = e.frequency;
    vocab_json.push_back(std::move(entry));
  }
  j["vocab"] = std::move(vocab_json);
  j["rows"] = rows;
  j["ledger"] = {{"limit", budget_limit}, {"used", budget_used}};
  j["rng_state"] = rng_state;
  if (best_dev.has_value())
    j["best_dev"] = *best_dev;
  else
    j["best_dev"] = nullptr;
  return j;
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  Checkpoint c;
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw CheckpointError("checkpoint missing version field");
  const int version = j["version"].get<int>();
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version) + " (supported: " +
                          std::to_string(kVersion) + ")");
  try {
    c.config = TrainConfig::from_json(j.at("config"));
    for (const auto& entry : j.at("vocab"))
      c.vocab.entries.push_back({entry.at("ngram").get<std::string>(),
                                 entry.at("frequency").get<std::uint64_t>()});
    j.at("rows").get_to(c.rows);
    c.budget_limit = j.at("ledger").at("limit").get<std::size_t>();
    c.budget_used = j.at("ledger").at("used").get<std::size_t>();
    c.rng_state = j.at("rng_state").get<std::string>();
    if (!j.at("best_dev").is_null())
      c.best_dev = j.at("best_dev").get<double>();
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint fields: ") + e.what());
  }
  if (c.budget_used > c.budget_limit)
    throw CheckpointError("checkpoint ledger used exceeds limit");
  if (c.rows.size() != c.config.prompt_length)
    throw CheckpointError("checkpoint row count does not match prompt_length");
  for (const auto& row : c.rows)
    if (row.size() != c.vocab.entries.size())
      throw CheckpointError("checkpoint row width does not match vocabulary");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint is not valid JSON (" + path.string() +
                          "): " + e.what());
  }
  return from_json(j);
}

}  // namespace promptpg
