#pragma once

#include "mixsearch/corpus.hpp"
#include "mixsearch/io.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

namespace testsupport {

namespace fs = std::filesystem;
using mixsearch::Json;

inline fs::path source_dir() { return fs::path(MIXSEARCH_SOURCE_DIR); }
inline fs::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

/// Pinned SHA-256 of fixtures/replay_trajectory.json.
inline constexpr const char* kReplayFixtureSha256 = "c09dcf2c0023770ae2f40bbe96f82f94c6ffd5a0a1130f625fd9159ad030a32c";

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "mixsearch-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

struct DocSpec {
  std::string dataset;
  std::string bucket;
  std::uint64_t tokens;
  std::map<std::string, std::string> tags = {};
};

/// Writes a metadata-only pool (token_count records) with one "level" axis per
/// dataset and returns the manifest path. Buckets are taken from the docs.
inline fs::path write_pool(const fs::path& dir, const std::vector<DocSpec>& docs, std::uint64_t window_length = 4096,
                           std::uint64_t stride = 0) {
  fs::create_directories(dir);
  std::map<std::string, std::vector<std::string>> buckets;
  std::map<std::string, std::string> lines;
  int id = 0;
  for (const auto& d : docs) {
    auto& b = buckets[d.dataset];
    if (std::find(b.begin(), b.end(), d.bucket) == b.end()) b.push_back(d.bucket);
    Json tags = Json::object();
    for (const auto& [k, v] : d.tags) tags[k] = v;
    tags["level"] = d.bucket;
    lines[d.dataset] += Json{{"id", fmt::format("doc{}", id++)}, {"dataset", d.dataset}, {"bucket", d.bucket},
                             {"tags", tags}, {"token_count", d.tokens}}.dump() + "\n";
  }
  Json datasets = Json::array();
  for (const auto& [ds, ids] : buckets) {
    Json bl = Json::array();
    for (const auto& b : ids) bl.push_back({{"id", b}, {"slice", {{"level", b}}}});
    datasets.push_back({{"id", ds}, {"source", ds + ".jsonl"}, {"enumerations", {{"level", ids}}}, {"buckets", bl}});
    mixsearch::write_file_atomic(dir / (ds + ".jsonl"), lines[ds]);
  }
  Json manifest = {{"window_length", window_length}, {"datasets", datasets}};
  if (stride > 0) manifest["stride"] = stride;
  mixsearch::write_file_atomic(dir / "manifest.json", manifest.dump(2));
  return dir / "manifest.json";
}

inline mixsearch::Pool make_pool(const fs::path& dir, const std::vector<DocSpec>& docs, std::uint64_t window_length = 4096) {
  return mixsearch::load_pool(mixsearch::read_pool_manifest(write_pool(dir, docs, window_length)));
}

/// All regular files under `dir` with their bytes, keyed by relative path.
inline std::map<std::string, std::string> snapshot_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = mixsearch::read_text_file(e.path());
  }
  return out;
}

}  // namespace testsupport
