#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace bweb::cli {

inline constexpr const char* kManifestSchema = "bweb.manifest/1";

// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string utc_timestamp();

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::vector<std::string> command_line;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;
  std::vector<OutputFile> outputs;

  nlohmann::json to_json() const;
};

// Collects outputs written under one directory and finishes with the
// manifest, which is always the last file written.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);

  void write(const std::string& name, const std::string& content);
  void finish(RunManifest manifest, const std::string& name = "manifest.json");

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<OutputFile> outputs_;
};

}  // namespace bweb::cli
