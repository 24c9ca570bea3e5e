#pragma once

#include <memory>
#include <string>

#include "promptpg/oracle.hpp"

namespace promptpg {

struct HttpOracleConfig {
  std::string endpoint;  // scheme://host:port, no trailing slash needed
  std::string auth_token;
  int max_attempts = 3;
  int timeout_seconds = 30;
  int backoff_base_ms = 500;  // doubles after each retryable failure

  void validate() const;

  // Reads ORACLE_ENDPOINT (required) and ORACLE_AUTH_TOKEN.
  static HttpOracleConfig from_env();
};

// Remote scoring backend speaking POST /v1/score:
//   request  {"inputs": [...], "candidates": [[label words...], ...]}
//   response {"scores": [[log-prob per word, same order], ...]}
// 429 and 5xx/transport errors are retried with exponential backoff;
// other 4xx fail immediately. All failures raise OracleUnavailable.
class HttpOracle : public Oracle {
 public:
  HttpOracle(HttpOracleConfig config, BudgetLedger& ledger,
             BillingUnit billing = BillingUnit::per_batch);
  ~HttpOracle() override;

 protected:
  std::vector<ClassScores> score_batch(std::span<const Query> queries,
                                       const Verbalizer& verbalizer) override;

 private:
  struct Impl;
  HttpOracleConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace promptpg
