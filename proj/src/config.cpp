#include "rmab/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rmab {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvConfig KvConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw IoFailure("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

KvConfig KvConfig::from_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw InvalidConfig("config line " + std::to_string(lineno) +
                            ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw InvalidConfig("config line " + std::to_string(lineno) +
                            ": empty section name");
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidConfig("config line " + std::to_string(lineno) +
                          ": expected key = value, got \"" + t + "\"");
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw InvalidConfig("config line " + std::to_string(lineno) +
                          ": empty key");
    if (!section.empty()) key = section + "." + key;
    cfg.values_[key] = trim(t.substr(eq + 1));
  }
  return cfg;
}

bool KvConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string KvConfig::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw InvalidConfig("missing required config key: " + key);
  return it->second;
}

std::string KvConfig::get_string(const std::string& key,
                                 const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

namespace {

int64_t to_int(const std::string& key, const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE)
    throw InvalidConfig("config key " + key + ": \"" + raw +
                        "\" is not an integer");
  return v;
}

uint64_t to_uint64(const std::string& key, const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(raw.c_str(), &end, 10);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE ||
      raw.find('-') != std::string::npos)
    throw InvalidConfig("config key " + key + ": \"" + raw +
                        "\" is not a non-negative integer");
  return v;
}

double to_double(const std::string& key, const std::string& raw) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(raw.c_str(), &end);
  if (end == raw.c_str() || *end != '\0' || errno == ERANGE)
    throw InvalidConfig("config key " + key + ": \"" + raw +
                        "\" is not a number");
  return v;
}

}  // namespace

int64_t KvConfig::get_int(const std::string& key) const {
  return to_int(key, get_string(key));
}

int64_t KvConfig::get_int(const std::string& key, int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

uint64_t KvConfig::get_uint64(const std::string& key) const {
  return to_uint64(key, get_string(key));
}

uint64_t KvConfig::get_uint64(const std::string& key,
                              uint64_t fallback) const {
  return has(key) ? get_uint64(key) : fallback;
}

double KvConfig::get_double(const std::string& key) const {
  return to_double(key, get_string(key));
}

double KvConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoFailure("cannot open for writing: " + path);
  std::fprintf(f, "#rmab-manifest-v1\n");
  std::fprintf(f, "command = %s\n", manifest.command.c_str());
  std::fprintf(f, "tool_version = %s\n", manifest.tool_version.c_str());
  for (const auto& [k, v] : manifest.config)
    std::fprintf(f, "config.%s = %s\n", k.c_str(), v.c_str());
  for (size_t i = 0; i < manifest.inputs.size(); ++i)
    std::fprintf(f, "input.%03zu = %s\n", i, manifest.inputs[i].c_str());
  for (size_t i = 0; i < manifest.outputs.size(); ++i)
    std::fprintf(f, "output.%03zu = %s\n", i, manifest.outputs[i].c_str());
  if (std::fclose(f) != 0) throw IoFailure("write failed: " + path);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) throw IoFailure("cannot open manifest: " + path);
  std::string first;
  std::getline(in, first);
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first != "#rmab-manifest-v1")
    throw SchemaViolation(path + ": expected #rmab-manifest-v1 first line");
  std::ostringstream rest;
  rest << in.rdbuf();
  KvConfig kv = KvConfig::from_string(rest.str());
  RunManifest m;
  m.command = kv.get_string("command");
  m.tool_version = kv.get_string("tool_version");
  for (const auto& [key, value] : kv.items()) {
    if (key.rfind("config.", 0) == 0)
      m.config[key.substr(7)] = value;
    else if (key.rfind("input.", 0) == 0)
      m.inputs.push_back(value);
    else if (key.rfind("output.", 0) == 0)
      m.outputs.push_back(value);
  }
  return m;
}

}  // namespace rmab
