#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rmab/model.hpp"

namespace rmab {

// key = value text config with optional [section] headers. Keys inside a
// section are addressed as "section.key". Later assignments win, so
// command-line overrides can be applied with set() after parsing.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig from_file(const std::string& path);    // IoFailure
  static KvConfig from_string(const std::string& text);  // InvalidConfig

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  // required lookups throw InvalidConfig naming the key; fallback
  // variants return the fallback when the key is absent
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  uint64_t get_uint64(const std::string& key) const;
  uint64_t get_uint64(const std::string& key, uint64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;

  // all entries sorted by key (the storage order)
  const std::map<std::string, std::string>& items() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Everything needed to repeat a command run: the resolved configuration
// (file values with overrides already applied), the files it read and
// wrote, and the tool version. Reruns from a manifest must reproduce the
// outputs byte for byte.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::map<std::string, std::string> config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);  // SchemaViolation

}  // namespace rmab
