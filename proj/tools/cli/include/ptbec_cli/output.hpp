#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ptbec::cli {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

struct OutputFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Files are written to a hidden staging directory inside the target and only
/// moved into place by commit(). A set that is destroyed without commit()
/// removes everything it wrote, so a failed run leaves no unmanifested files.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path directory);
  ~OutputSet();
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  /// Throws std::invalid_argument on a duplicate or path-like name.
  void write(const std::string& name, const std::string& contents);

  const std::vector<OutputFile>& files() const noexcept { return files_; }
  const std::filesystem::path& directory() const noexcept { return directory_; }

  /// Moves the staged files into the directory and writes `manifest.json`
  /// with an "outputs" array listing each of them once.
  void commit(nlohmann::ordered_json manifest);

 private:
  std::filesystem::path directory_;
  std::filesystem::path staging_;
  std::vector<OutputFile> files_;
  bool committed_ = false;
};

}  // namespace ptbec::cli
