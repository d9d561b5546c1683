#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "innout/error.hpp"

namespace innout {

// Line-delimited JSON manifests; one object per line so stages can stream.

inline std::vector<nlohmann::json> manifest_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::vector<nlohmann::json> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw IoError("malformed JSON at " + path.string() + ":" +
                    std::to_string(lineno));
    records.push_back(std::move(j));
  }
  return records;
}

inline void manifest_write(const std::filesystem::path& path,
                           const std::vector<nlohmann::json>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  for (const auto& j : records) out << j.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T>
std::vector<T> manifest_read_as(const std::filesystem::path& path) {
  std::vector<T> out;
  for (const auto& j : manifest_read(path)) out.push_back(j.get<T>());
  return out;
}

template <typename T>
void manifest_write_as(const std::filesystem::path& path,
                       const std::vector<T>& records) {
  std::vector<nlohmann::json> js;
  js.reserve(records.size());
  for (const auto& r : records) js.push_back(nlohmann::json(r));
  manifest_write(path, js);
}

}  // namespace innout
