#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;

namespace sgvqa::testing {

fs::path data_dir() { return fs::path(SGVQA_TEST_DATA_DIR); }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("sgvqa-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
           std::to_string(rd()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

MockScript script_with_default(const std::string& fallback) {
  return MockScript::from_json(json{{"default", fallback}});
}

std::shared_ptr<MockBackend> mock_backend(const json& script) {
  return std::make_shared<MockBackend>(MockScript::from_json(script));
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string tree_fingerprint(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root));
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) {
    out += f.string() + "\n" + sha256_hex(read_text_file(root / f)) + "\n";
  }
  return out;
}

}  // namespace sgvqa::testing
