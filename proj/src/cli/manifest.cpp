#include "cli/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "bweb/digest.hpp"
#include "bweb/error.hpp"

namespace bweb::cli {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move output into place: " + path.string());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : outputs) {
    files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  return {{"schema", kManifestSchema},
          {"command_line", command_line},
          {"config_digest", config_digest},
          {"seed", seed},
          {"tool_version", tool_version},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"outputs", std::move(files)}};
}

OutputDir::OutputDir(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_.string());
}

void OutputDir::write(const std::string& name, const std::string& content) {
  write_atomic(dir_ / name, content);
  outputs_.push_back({name, sha256_hex(content), content.size()});
}

void OutputDir::finish(RunManifest manifest, const std::string& name) {
  manifest.outputs = outputs_;
  manifest.finished_at = utc_timestamp();
  write_atomic(dir_ / name, manifest.to_json().dump(2) + "\n");
}

}  // namespace bweb::cli
