#include "promptpg/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "promptpg/errors.hpp"

#ifndef PROMPTPG_VERSION
#define PROMPTPG_VERSION "0.0.0"
#endif
#ifndef PROMPTPG_GIT_REV
#define PROMPTPG_GIT_REV "unknown"
#endif

namespace promptpg {

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file for digest: " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  char out[32];
  std::snprintf(out, sizeof(out), "fnv1a:%016llx",
                static_cast<unsigned long long>(hash));
  return out;
}

std::string now_iso8601_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs[path.string()] = file_digest(path);
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config"] = config;
  j["inputs"] = inputs;
  j["source_revision"] = source_revision;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["metrics"] = metrics;
  j["billed_calls"] = billed_calls;
  return j;
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest: " + path.string());
}

std::string source_revision() {
  return std::string(PROMPTPG_VERSION) + "+" + PROMPTPG_GIT_REV;
}

}  // namespace promptpg
