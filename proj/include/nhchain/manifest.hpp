#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "nhchain/io.hpp"
#include "nhchain/version.hpp"

namespace nhchain {

// FNV-1a, 64 bit; stable fingerprint for run provenance.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Provenance sidecar: sorted key=value lines next to every produced
// artifact. spec_hash fingerprints the resolved run configuration.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value) {
    entries_[key] = value;
  }
  void set(const std::string& key, double value) {
    entries_[key] = format_double(value);
  }
  void set(const std::string& key, std::uint64_t value) {
    entries_[key] = std::to_string(value);
  }
  void set(const std::string& key, int value) {
    entries_[key] = std::to_string(value);
  }

  std::string text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream out = open_output(path);
    out << text();
    if (!out) throw std::runtime_error("write failed: " + path);
  }

 private:
  std::map<std::string, std::string> entries_;  // sorted by key
};

// Canonical manifest skeleton shared by all subcommands. config_text is
// the resolved configuration the run actually used.
inline Manifest make_manifest(const std::string& config_text,
                              std::uint64_t seed) {
  Manifest m;
  m.set("version", std::string(kVersion));
  m.set("seed", seed);
  char hex[19];
  std::snprintf(hex, sizeof(hex), "0x%016llx",
                static_cast<unsigned long long>(fnv1a64(config_text)));
  m.set("spec_hash", std::string(hex));
  return m;
}

inline std::string manifest_path_for(const std::string& artifact_path) {
  return artifact_path + ".manifest";
}

}  // namespace nhchain
