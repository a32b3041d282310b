#pragma once

// Run manifests for reproducibility. Requires linking libcrypto.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>

#include <json.hpp>
#include <openssl/evp.h>

#include "bifocal/binio.hpp"
#include "bifocal/errors.hpp"

namespace bifocal {

inline std::string sha256_hex(std::span<const std::uint8_t> data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) !=
      1) {
    throw NumericError("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

inline std::string sha256_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return sha256_hex(bytes);
}

// One manifest per CLI run: what ran, with which config, touching which
// files, and the digests of everything written.
struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;   // role -> path
  std::map<std::string, std::string> outputs;  // role -> path
  double duration_seconds = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json hashes = nlohmann::json::object();
    for (const auto& [role, path] : outputs) {
      const std::filesystem::path p(path);
      if (std::filesystem::is_directory(p)) {
        for (const auto& entry :
             std::filesystem::directory_iterator(p)) {
          if (entry.is_regular_file()) {
            hashes[entry.path().lexically_normal().string()] =
                sha256_file(entry.path());
          }
        }
      } else if (std::filesystem::is_regular_file(p)) {
        hashes[path] = sha256_file(p);
      }
    }
    return {{"command", command},  {"config", config},
            {"seed", seed},        {"inputs", inputs},
            {"outputs", outputs},  {"sha256", hashes},
            {"duration_seconds", duration_seconds}};
  }

  void write(const std::filesystem::path& path) const {
    io::write_file(path, to_json().dump(2) + "\n");
  }
};

}  // namespace bifocal
