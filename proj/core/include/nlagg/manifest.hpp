#pragma once

// Run bookkeeping for an output directory: a lock file that keeps a second
// writer out and a manifest.json written once the run ends.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nlagg {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Current UTC time, ISO 8601 with seconds.
std::string utc_timestamp();

struct RunManifest {
  std::string command;
  /// SHA-256 of config.toml as stored in the output directory.
  std::string config_hash;
  std::string version;
  std::string start_time;
  std::string end_time;
  /// Paths relative to the output directory.
  std::vector<std::string> outputs;
  int exit_status = 0;
  std::string message;

  /// Writes manifest.json through a temporary file and a rename.
  void write(const std::filesystem::path& dir) const;
  /// CorruptHeader on malformed JSON or missing fields.
  static RunManifest read(const std::filesystem::path& path);
};

/// Exclusive lock on an output directory (creates it if needed). Throws Io if
/// another run holds `.nlagg.lock`; the file is removed on destruction.
class DirectoryLock {
public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace nlagg
