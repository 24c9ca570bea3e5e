#include "promptpg/http_oracle.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "promptpg/errors.hpp"

namespace promptpg {

void HttpOracleConfig::validate() const {
  if (endpoint.empty())
    throw ConfigError("http oracle: endpoint must not be empty");
  if (max_attempts < 1)
    throw ConfigError("http oracle: max_attempts must be >= 1");
  if (timeout_seconds < 1)
    throw ConfigError("http oracle: timeout must be >= 1s");
  if (backoff_base_ms < 0)
    throw ConfigError("http oracle: backoff must be >= 0");
}

HttpOracleConfig HttpOracleConfig::from_env() {
  HttpOracleConfig config;
  const char* endpoint = std::getenv("ORACLE_ENDPOINT");
  if (endpoint == nullptr || *endpoint == '\0')
    throw ConfigError("ORACLE_ENDPOINT is not set (or pass --synthetic)");
  config.endpoint = endpoint;
  if (const char* token = std::getenv("ORACLE_AUTH_TOKEN"))
    config.auth_token = token;
  return config;
}

struct HttpOracle::Impl {
  httplib::Client client;

  explicit Impl(const HttpOracleConfig& config) : client(config.endpoint) {
    client.set_connection_timeout(config.timeout_seconds, 0);
    client.set_read_timeout(config.timeout_seconds, 0);
    client.set_write_timeout(config.timeout_seconds, 0);
    if (!config.auth_token.empty())
      client.set_default_headers(
          {{"Authorization", "Bearer " + config.auth_token}});
  }
};

HttpOracle::HttpOracle(HttpOracleConfig config, BudgetLedger& ledger,
                       BillingUnit billing)
    : Oracle(ledger, billing), config_(std::move(config)) {
  config_.validate();
  impl_ = std::make_unique<Impl>(config_);
}

HttpOracle::~HttpOracle() = default;

std::vector<ClassScores> HttpOracle::score_batch(
    std::span<const Query> queries, const Verbalizer& verbalizer) {
  const std::vector<std::string> words = verbalizer.flat_words();
  const std::vector<std::size_t> counts = verbalizer.class_word_counts();

  nlohmann::ordered_json request;
  request["inputs"] = nlohmann::json::array();
  request["candidates"] = nlohmann::json::array();
  for (const Query& q : queries) {
    request["inputs"].push_back(q.text);
    request["candidates"].push_back(words);
  }
  const std::string body = request.dump();

  std::string last_error;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0 && config_.backoff_base_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(
          config_.backoff_base_ms << (attempt - 1)));

    auto res = impl_->client.Post("/v1/score", body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw OracleUnavailable("oracle rejected request with status " +
                              std::to_string(res->status));

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw OracleUnavailable(std::string("oracle sent invalid JSON: ") +
                              e.what());
    }
    if (!reply.contains("scores") || !reply["scores"].is_array() ||
        reply["scores"].size() != queries.size())
      throw OracleUnavailable("oracle reply missing per-query scores");

    std::vector<ClassScores> out;
    out.reserve(queries.size());
    for (const auto& row : reply["scores"]) {
      if (!row.is_array() || row.size() != words.size())
        throw OracleUnavailable("oracle reply has wrong word-score count");
      std::vector<double> word_scores;
      word_scores.reserve(words.size());
      for (const auto& v : row) {
        if (!v.is_number())
          throw OracleUnavailable("oracle reply has non-numeric score");
        word_scores.push_back(v.get<double>());
      }
      out.push_back(class_scores_from_word_logprobs(word_scores, counts));
    }
    return out;
  }
  throw OracleUnavailable("oracle unreachable after " +
                          std::to_string(config_.max_attempts) +
                          " attempts (" + last_error + ")");
}

}  // namespace promptpg
