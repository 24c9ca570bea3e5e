#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace promptpg {

// FNV-1a 64-bit digest of a file's bytes, as "fnv1a:<16 hex digits>".
std::string file_digest(const std::filesystem::path& path);

std::string now_iso8601_utc();

// Provenance record written next to every oracle-touching command's output.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::map<std::string, std::string> inputs;  // path -> digest
  std::string source_revision;
  std::string started_at;
  std::string finished_at;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::uint64_t billed_calls = 0;

  void add_input(const std::filesystem::path& path);

  nlohmann::ordered_json to_json() const;
  void save(const std::filesystem::path& path) const;
};

// Binary version plus the git revision baked in at configure time.
std::string source_revision();

}  // namespace promptpg
