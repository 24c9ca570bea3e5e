#include "promptpg/mock_server.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "promptpg/errors.hpp"

namespace promptpg {

namespace {
// Log probability handed out for candidate words the task knows nothing
// about; small enough to never win an argmax.
constexpr double kUnknownWordScore = -30.0;
}  // namespace

void MockServerConfig::validate() const {
  task.validate();
  if (label_words.size() != task.num_classes)
    throw InvalidInput("mock server: label_words/classes mismatch");
  for (const auto& words : label_words)
    if (words.empty())
      throw InvalidInput("mock server: class with no label words");
  if (port < 0 || port > 65535)
    throw InvalidInput("mock server: port out of range");
  if (inject_429_every < 0)
    throw InvalidInput("mock server: inject_429_every must be >= 0");
}

struct MockScoringServer::Impl {
  MockServerConfig config;
  std::map<std::string, std::size_t> word_class;
  std::vector<double> class_log_word_count;

  httplib::Server server;
  std::thread thread;
  int port = 0;

  std::atomic<std::uint64_t> attempts{0};
  std::atomic<std::uint64_t> scored{0};
  std::atomic<std::uint64_t> rate_limited{0};

  explicit Impl(MockServerConfig cfg) : config(std::move(cfg)) {
    config.validate();
    for (std::size_t c = 0; c < config.label_words.size(); ++c) {
      class_log_word_count.push_back(
          std::log(static_cast<double>(config.label_words[c].size())));
      for (const auto& w : config.label_words[c])
        if (!word_class.emplace(w, c).second)
          throw InvalidInput("mock server: label word used twice: " + w);
    }
    install_routes();
  }

  void install_routes() {
    server.Post("/v1/score", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      handle_score(req, res);
    });
    server.Get("/v1/stats",
               [this](const httplib::Request&, httplib::Response& res) {
                 nlohmann::ordered_json j;
                 j["attempts"] = attempts.load();
                 j["scored"] = scored.load();
                 j["rate_limited"] = rate_limited.load();
                 res.set_content(j.dump(), "application/json");
               });
  }

  void handle_score(const httplib::Request& req, httplib::Response& res) {
    const std::uint64_t attempt = ++attempts;

    if (!config.require_token.empty()) {
      const std::string want = "Bearer " + config.require_token;
      if (req.get_header_value("Authorization") != want) {
        res.status = 401;
        res.set_content(R"({"error":"unauthorized"})", "application/json");
        return;
      }
    }

    if (config.inject_429_every > 0 &&
        attempt % static_cast<std::uint64_t>(config.inject_429_every) == 0) {
      ++rate_limited;
      res.status = 429;
      res.set_content(R"({"error":"rate limited"})", "application/json");
      return;
    }

    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      res.set_content(R"({"error":"invalid json"})", "application/json");
      return;
    }
    if (!body.contains("inputs") || !body["inputs"].is_array() ||
        !body.contains("candidates") || !body["candidates"].is_array() ||
        body["inputs"].size() != body["candidates"].size()) {
      res.status = 400;
      res.set_content(R"({"error":"bad request shape"})", "application/json");
      return;
    }

    nlohmann::ordered_json reply;
    reply["scores"] = nlohmann::json::array();
    for (std::size_t i = 0; i < body["inputs"].size(); ++i) {
      if (!body["inputs"][i].is_string() || !body["candidates"][i].is_array()) {
        res.status = 400;
        res.set_content(R"({"error":"bad request shape"})", "application/json");
        return;
      }
      const std::string text = body["inputs"][i].get<std::string>();
      const std::vector<double> class_scores =
          config.task.class_scores_for(text);
      nlohmann::json row = nlohmann::json::array();
      for (const auto& cand : body["candidates"][i]) {
        if (!cand.is_string()) {
          res.status = 400;
          res.set_content(R"({"error":"bad candidate"})", "application/json");
          return;
        }
        const auto it = word_class.find(cand.get<std::string>());
        if (it == word_class.end()) {
          row.push_back(kUnknownWordScore);
        } else {
          // Spread the class score across its label words so summing word
          // probabilities on the client reproduces the class score exactly.
          row.push_back(class_scores[it->second] -
                        class_log_word_count[it->second]);
        }
      }
      reply["scores"].push_back(std::move(row));
    }
    ++scored;
    res.set_content(reply.dump(), "application/json");
  }
};

MockScoringServer::MockScoringServer(MockServerConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

MockScoringServer::~MockScoringServer() { stop(); }

void MockScoringServer::start() {
  if (impl_->thread.joinable()) throw Error("mock server already started");
  if (impl_->config.port > 0) {
    if (!impl_->server.bind_to_port("127.0.0.1", impl_->config.port))
      throw Error("mock server failed to bind port " +
                  std::to_string(impl_->config.port));
    impl_->port = impl_->config.port;
  } else {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  }
  if (impl_->port <= 0) throw Error("mock server failed to bind a port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  for (int i = 0; i < 200 && !impl_->server.is_running(); ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  if (!impl_->server.is_running())
    throw Error("mock server did not come up");
}

void MockScoringServer::stop() {
  if (!impl_->thread.joinable()) return;
  impl_->server.stop();
  impl_->thread.join();
}

int MockScoringServer::port() const { return impl_->port; }

std::string MockScoringServer::endpoint() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::uint64_t MockScoringServer::attempts() const { return impl_->attempts; }
std::uint64_t MockScoringServer::scored() const { return impl_->scored; }
std::uint64_t MockScoringServer::rate_limited() const {
  return impl_->rate_limited;
}

}  // namespace promptpg
