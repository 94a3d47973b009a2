#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <string>

#include <openssl/evp.h>

#include "gass/error.hpp"
#include "gass/io/canonical_json.hpp"
#include "gass/io/config.hpp"

namespace gass::io {

inline constexpr const char* kToolVersion = "0.3.0";

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::IoError, "SHA-256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// What a run directory needs to be regenerated: the command, the full
/// config, and hashes of every output file. The timestamp is the only
/// field that differs between a run and its replay.
struct RunManifest {
  std::string command;  // "sample" or "compare"
  RunConfig config;
  std::uint64_t seed_first = 0, seed_last = 0;  // compare range; sample uses seed_first
  int effective_candidates = 0;
  std::string version = kToolVersion;
  std::string timestamp;
  std::map<std::string, std::string> outputs;  // file name -> sha256
};

inline json to_json(const RunManifest& m) {
  json outputs = json::object();
  for (const auto& [k, v] : m.outputs) outputs[k] = v;
  return {{"command", m.command},
          {"config", config_to_json(m.config)},
          {"seed_first", std::to_string(m.seed_first)},
          {"seed_last", std::to_string(m.seed_last)},
          {"effective_candidates", m.effective_candidates},
          {"version", m.version},
          {"timestamp", m.timestamp},
          {"outputs", outputs}};
}

inline RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config = config_from_json(j.at("config"));
    m.seed_first = std::stoull(j.at("seed_first").get<std::string>());
    m.seed_last = std::stoull(j.at("seed_last").get<std::string>());
    m.effective_candidates = j.at("effective_candidates").get<int>();
    m.version = j.at("version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& [k, v] : j.at("outputs").items()) m.outputs[k] = v.get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("bad manifest: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(ErrorKind::ParseError, std::string("bad manifest seed: ") + e.what());
  }
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  write_text_file(path, to_canonical_json(to_json(m)));
}

inline RunManifest read_manifest(const std::string& path) { return manifest_from_json(read_json_file(path)); }

}  // namespace gass::io
