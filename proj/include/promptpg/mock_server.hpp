#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "promptpg/planted.hpp"

namespace promptpg {

struct MockServerConfig {
  PlantedTaskSpec task;
  std::vector<std::vector<std::string>> label_words;  // class order
  int port = 0;               // 0 picks a free port
  int inject_429_every = 0;   // every k-th scoring attempt gets a 429
  std::string require_token;  // if set, bearer token must match

  void validate() const;
};

// In-process HTTP server speaking the scoring wire protocol, backed by the
// planted task. Tracks attempts, successful scorings and injected 429s;
// also serves them at GET /v1/stats.
class MockScoringServer {
 public:
  explicit MockScoringServer(MockServerConfig config);
  ~MockScoringServer();

  MockScoringServer(const MockScoringServer&) = delete;
  MockScoringServer& operator=(const MockScoringServer&) = delete;

  void start();  // binds 127.0.0.1 on a free port
  void stop();

  int port() const;
  std::string endpoint() const;

  std::uint64_t attempts() const;
  std::uint64_t scored() const;
  std::uint64_t rate_limited() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace promptpg
