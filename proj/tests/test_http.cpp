#include <doctest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "promptpg/errors.hpp"
#include "promptpg/http_oracle.hpp"
#include "promptpg/mock_server.hpp"
#include "promptpg/planted.hpp"

using namespace promptpg;

namespace {

PlantedTaskSpec wire_spec() {
  PlantedTaskSpec spec;
  spec.num_classes = 2;
  spec.weight = 2.5;
  spec.planted = {{"north"}, {"south"}};
  spec.default_base = {0.1, -0.2};
  spec.base_scores["doc042"] = {1.0 / 3.0, -2.0 / 7.0};
  return spec;
}

Verbalizer wire_verbalizer() {
  Verbalizer v;
  v.labels = {"0", "1"};
  v.label_words = {{"bad"}, {"good"}};
  return v;
}

MockServerConfig server_config() {
  MockServerConfig cfg;
  cfg.task = wire_spec();
  cfg.label_words = {{"bad"}, {"good"}};
  return cfg;
}

std::vector<Query> wire_batch() {
  const std::vector<std::string> north = {"north"};
  const std::vector<std::string> mixed = {"south", "north", "south"};
  return {make_query(north, "doc042", Placement::prefix),
          make_query(mixed, "doc001", Placement::suffix),
          make_query({}, "plain text", Placement::prefix)};
}

HttpOracleConfig client_config(const std::string& endpoint) {
  HttpOracleConfig cfg;
  cfg.endpoint = endpoint;
  cfg.backoff_base_ms = 0;
  cfg.timeout_seconds = 5;
  return cfg;
}

}  // namespace

TEST_CASE("http oracle config validation") {
  HttpOracleConfig cfg = client_config("http://127.0.0.1:1");
  CHECK_NOTHROW(cfg.validate());

  SUBCASE("empty endpoint") {
    cfg.endpoint.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("no attempts") {
    cfg.max_attempts = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("zero timeout") {
    cfg.timeout_seconds = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("negative backoff") {
    cfg.backoff_base_ms = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("http oracle config from environment") {
  setenv("ORACLE_ENDPOINT", "http://example.test:9", 1);
  setenv("ORACLE_AUTH_TOKEN", "sesame", 1);
  HttpOracleConfig cfg = HttpOracleConfig::from_env();
  CHECK(cfg.endpoint == "http://example.test:9");
  CHECK(cfg.auth_token == "sesame");

  unsetenv("ORACLE_AUTH_TOKEN");
  cfg = HttpOracleConfig::from_env();
  CHECK(cfg.auth_token.empty());

  unsetenv("ORACLE_ENDPOINT");
  CHECK_THROWS_AS(HttpOracleConfig::from_env(), ConfigError);
}

TEST_CASE("wire scores match in-process scores bit for bit") {
  MockScoringServer server(server_config());
  server.start();

  BudgetLedger wire_ledger(10);
  HttpOracle remote(client_config(server.endpoint()), wire_ledger);

  BudgetLedger local_ledger(10);
  PlantedOracle local(wire_spec(), local_ledger);

  const Verbalizer v = wire_verbalizer();
  const std::vector<Query> batch = wire_batch();
  const auto remote_scores = remote.predict(batch, v);
  const auto local_scores = local.predict(batch, v);

  REQUIRE(remote_scores.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(remote_scores[i].raw() == local_scores[i].raw());
    CHECK(remote_scores[i].probs() == local_scores[i].probs());
  }
  CHECK(server.scored() == 1);
  CHECK(wire_ledger.used() == 1);
}

TEST_CASE("multi-word classes collapse back to the class score") {
  MockServerConfig cfg = server_config();
  cfg.label_words = {{"terrible", "awful"}, {"great"}};
  MockScoringServer server(cfg);
  server.start();

  Verbalizer v;
  v.labels = {"0", "1"};
  v.label_words = {{"terrible", "awful"}, {"great"}};

  BudgetLedger ledger(10);
  HttpOracle remote(client_config(server.endpoint()), ledger);
  const std::vector<Query> batch = wire_batch();
  const auto scores = remote.predict(batch, v);

  const PlantedTaskSpec spec = wire_spec();
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto expected = spec.class_scores_for(batch[i].text);
    for (std::size_t c = 0; c < expected.size(); ++c)
      CHECK(scores[i].raw()[c] ==
            doctest::Approx(expected[c]).epsilon(1e-12));
  }
}

TEST_CASE("words the server does not know score very low") {
  MockScoringServer server(server_config());
  server.start();

  Verbalizer v;
  v.labels = {"0", "1"};
  v.label_words = {{"bad"}, {"mystery"}};

  BudgetLedger ledger(10);
  HttpOracle remote(client_config(server.endpoint()), ledger);
  const std::vector<Query> batch = {make_query({}, "plain", Placement::prefix)};
  const auto scores = remote.predict(batch, v);
  REQUIRE(scores.size() == 1);
  CHECK(scores[0].raw()[0] == 0.1);
  CHECK(scores[0].raw()[1] == -30.0);
  CHECK(scores[0].predicted() == 0);
}

TEST_CASE("rate limits are retried and billed once") {
  MockServerConfig cfg = server_config();
  cfg.inject_429_every = 2;
  MockScoringServer server(cfg);
  server.start();

  BudgetLedger ledger(10);
  HttpOracle remote(client_config(server.endpoint()), ledger);
  const Verbalizer v = wire_verbalizer();
  const std::vector<Query> batch = wire_batch();

  for (int i = 0; i < 3; ++i) remote.predict(batch, v);

  CHECK(server.scored() == 3);
  CHECK(ledger.used() == 3);  // billed == successful scorings, not attempts
  CHECK(server.rate_limited() == 2);
  CHECK(server.attempts() == 5);
}

TEST_CASE("persistent rate limiting exhausts retries and refunds") {
  MockServerConfig cfg = server_config();
  cfg.inject_429_every = 1;
  MockScoringServer server(cfg);
  server.start();

  BudgetLedger ledger(10);
  HttpOracle remote(client_config(server.endpoint()), ledger);
  CHECK_THROWS_AS(remote.predict(wire_batch(), wire_verbalizer()),
                  OracleUnavailable);
  CHECK(server.attempts() == 3);
  CHECK(server.scored() == 0);
  CHECK(ledger.used() == 0);
  CHECK(ledger.reserved() == 0);
}

TEST_CASE("auth token is required when the server demands one") {
  MockServerConfig cfg = server_config();
  cfg.require_token = "sesame";
  MockScoringServer server(cfg);
  server.start();

  const Verbalizer v = wire_verbalizer();

  SUBCASE("missing token fails without retries") {
    BudgetLedger ledger(10);
    HttpOracle remote(client_config(server.endpoint()), ledger);
    CHECK_THROWS_AS(remote.predict(wire_batch(), v), OracleUnavailable);
    CHECK(server.attempts() == 1);  // 401 is not retryable
    CHECK(ledger.used() == 0);
  }

  SUBCASE("matching token succeeds") {
    HttpOracleConfig ccfg = client_config(server.endpoint());
    ccfg.auth_token = "sesame";
    BudgetLedger ledger(10);
    HttpOracle remote(ccfg, ledger);
    CHECK(remote.predict(wire_batch(), v).size() == 3);
    CHECK(ledger.used() == 1);
  }
}

TEST_CASE("unreachable endpoint raises after retrying") {
  HttpOracleConfig cfg = client_config("http://127.0.0.1:1");
  cfg.timeout_seconds = 1;
  BudgetLedger ledger(10);
  HttpOracle remote(cfg, ledger);
  CHECK_THROWS_AS(remote.predict(wire_batch(), wire_verbalizer()),
                  OracleUnavailable);
  CHECK(ledger.used() == 0);
  CHECK(ledger.reserved() == 0);
}

TEST_CASE("per example billing counts queries not requests") {
  MockScoringServer server(server_config());
  server.start();

  BudgetLedger ledger(10);
  HttpOracle remote(client_config(server.endpoint()), ledger,
                    BillingUnit::per_example);
  remote.predict(wire_batch(), wire_verbalizer());
  CHECK(ledger.used() == 3);
  CHECK(server.scored() == 1);
}

TEST_CASE("stats endpoint reports the counters") {
  MockScoringServer server(server_config());
  server.start();

  BudgetLedger ledger(10);
  HttpOracle remote(client_config(server.endpoint()), ledger);
  remote.predict(wire_batch(), wire_verbalizer());

  httplib::Client probe(server.endpoint());
  auto res = probe.Get("/v1/stats");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  const auto j = nlohmann::json::parse(res->body);
  CHECK(j.at("attempts").get<std::uint64_t>() == server.attempts());
  CHECK(j.at("scored").get<std::uint64_t>() == 1);
  CHECK(j.at("rate_limited").get<std::uint64_t>() == 0);
}

TEST_CASE("server lifecycle guards") {
  MockScoringServer server(server_config());
  server.start();
  CHECK(server.port() > 0);
  CHECK_THROWS_AS(server.start(), Error);
  server.stop();
  server.stop();  // idempotent

  MockServerConfig bad = server_config();
  bad.label_words = {{"only one class"}};
  CHECK_THROWS_AS(MockScoringServer{bad}, InvalidInput);
}
