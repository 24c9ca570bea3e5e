#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "promptpg/errors.hpp"
#include "promptpg/mock_server.hpp"
#include "promptpg/oracle.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planted-task scoring server (POST /v1/score, GET /v1/stats)"};
  std::string spec_path;
  std::string verbalizer_path;
  std::string port_file;
  int port = 0;
  int inject_429_every = 0;
  std::string token;
  app.add_option("--spec", spec_path, "planted task spec JSON")->required();
  app.add_option("--verbalizer", verbalizer_path,
                 "verbalizer JSON providing the label words")
      ->required();
  app.add_option("--port", port, "port to bind (default: pick a free one)");
  app.add_option("--port-file", port_file,
                 "write the bound port to this file once listening");
  app.add_option("--inject-429-every", inject_429_every,
                 "answer every k-th scoring attempt with 429");
  app.add_option("--token", token, "require this bearer token");
  CLI11_PARSE(app, argc, argv);

  try {
    promptpg::MockServerConfig config;
    config.task = promptpg::PlantedTaskSpec::load(spec_path);
    config.label_words =
        promptpg::Verbalizer::load(verbalizer_path).label_words;
    config.port = port;
    config.inject_429_every = inject_429_every;
    config.require_token = token;

    promptpg::MockScoringServer server(std::move(config));
    server.start();
    std::cout << "listening on " << server.endpoint() << std::endl;
    if (!port_file.empty()) {
      std::ofstream out(port_file);
      out << server.port() << '\n';
    }

    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    while (!g_stop)
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    std::cout << "served " << server.scored() << " of " << server.attempts()
              << " scoring attempts (" << server.rate_limited()
              << " rate limited)" << std::endl;
    return 0;
  } catch (const promptpg::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
