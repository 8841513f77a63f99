#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "sgvqa/gateway.hpp"
#include "sgvqa/json_io.hpp"

namespace sgvqa::testing {

/// Checked-in fixture corpus.
std::filesystem::path data_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Mock backend whose every stage answers `fallback` unless a rule matches.
MockScript script_with_default(const std::string& fallback);

std::shared_ptr<MockBackend> mock_backend(const json& script);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Relative file order and byte content of every regular file under `root`.
std::string tree_fingerprint(const std::filesystem::path& root);

}  // namespace sgvqa::testing
