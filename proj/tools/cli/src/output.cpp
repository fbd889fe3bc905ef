#include "ptbec_cli/output.hpp"

#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace fs = std::filesystem;

namespace ptbec::cli {

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  os.close();
  if (!os) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

OutputSet::OutputSet(fs::path directory) : directory_(std::move(directory)) {
  fs::create_directories(directory_);
  static std::atomic<int> counter{0};
  staging_ = directory_ / (".staging-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(staging_);
  fs::create_directory(staging_);
}

OutputSet::~OutputSet() {
  std::error_code ec;
  if (!committed_) {
    // Undo a partial commit as well as the staged files.
    for (const OutputFile& f : files_) {
      if (fs::exists(staging_ / f.name, ec)) continue;
      fs::remove(directory_ / f.name, ec);
    }
  }
  fs::remove_all(staging_, ec);
}

void OutputSet::write(const std::string& name, const std::string& contents) {
  if (committed_) throw std::logic_error("output set already committed");
  if (name.empty() || name == "manifest.json" || name.find('/') != std::string::npos || name.front() == '.') {
    throw std::invalid_argument("invalid output file name '" + name + "'");
  }
  for (const OutputFile& f : files_) {
    if (f.name == name) throw std::invalid_argument("output file '" + name + "' written twice");
  }
  write_file(staging_ / name, contents);
  files_.push_back({name, sha256_hex(contents), contents.size()});
}

void OutputSet::commit(nlohmann::ordered_json manifest) {
  if (committed_) throw std::logic_error("output set already committed");
  nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
  for (const OutputFile& f : files_) {
    outputs.push_back({{"file", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  manifest["outputs"] = std::move(outputs);
  write_file(staging_ / "manifest.json", manifest.dump(2) + "\n");
  for (const OutputFile& f : files_) fs::rename(staging_ / f.name, directory_ / f.name);
  fs::rename(staging_ / "manifest.json", directory_ / "manifest.json");
  committed_ = true;
}

}  // namespace ptbec::cli
