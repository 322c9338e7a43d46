#pragma once

#include "mixsearch/common.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixsearch {

/// One budget-countable training unit.
struct TrainingWindow {
  std::string window_id;
  Dataset dataset = Dataset::XGuard;
  std::string bucket_id;
  std::uint64_t token_count = 0;
  std::string text_ref;
  std::map<std::string, std::string> tags;
};

struct BucketSpec {
  std::string bucket_id;
  SliceDescriptor slice;
};

/// The searchable buckets of one dataset, in declaration order.
struct BucketCatalog {
  Dataset dataset = Dataset::XGuard;
  std::vector<BucketSpec> buckets;

  const BucketSpec* find(std::string_view bucket_id) const;
};

struct DatasetDescriptor {
  Dataset id = Dataset::XGuard;
  std::filesystem::path source;
  std::map<std::string, std::vector<std::string>> enumerations;
  std::vector<BucketSpec> buckets;
};

struct PoolManifest {
  std::vector<DatasetDescriptor> datasets;
  std::uint64_t window_length = 4096;
  /// Defaults to window_length (non-overlapping windows).
  std::uint64_t stride = 4096;
};

/// Reads a manifest file. Dataset sources resolve relative to the manifest.
PoolManifest read_pool_manifest(const std::filesystem::path& path);

struct WindowSpan {
  std::uint64_t start = 0;
  std::uint64_t length = 0;
  bool operator==(const WindowSpan&) const = default;
};

/// Sliding windows over `token_count` tokens. Starts advance by `stride`;
/// the last window may be shorter. Throws ConfigError when stride > window_length.
std::vector<WindowSpan> split_windows(std::uint64_t token_count, std::uint64_t window_length,
                                      std::uint64_t stride);

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::uint64_t count(std::string_view text) const = 0;
};

/// Counts maximal runs of non-whitespace characters.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::uint64_t count(std::string_view text) const override;
};

struct BucketKey {
  Dataset dataset = Dataset::XGuard;
  std::string bucket_id;

  auto operator<=>(const BucketKey&) const = default;
  bool operator==(const BucketKey&) const = default;

  /// "XGUARD/x_low"
  std::string str() const;
  static BucketKey parse(std::string_view s);
};

/// Immutable, indexed set of training windows. Safe for concurrent reads.
class Pool {
 public:
  const std::vector<TrainingWindow>& windows() const { return windows_; }
  const TrainingWindow& window(std::size_t i) const { return windows_.at(i); }

  /// Indices into windows() for one bucket; empty span for unknown buckets.
  std::span<const std::size_t> members(const BucketKey& key) const;

  bool has_dataset(Dataset d) const { return catalogs_.contains(d); }
  const BucketCatalog& catalog(Dataset d) const;
  std::vector<BucketCatalog> catalogs() const;

  std::array<std::size_t, 3> window_counts() const { return counts_; }
  std::uint64_t window_length() const { return window_length_; }
  std::uint64_t max_window_tokens() const { return max_tokens_; }
  std::uint64_t min_tokens(const BucketKey& key) const;

 private:
  friend Pool load_pool(const PoolManifest&, const Tokenizer&);

  std::vector<TrainingWindow> windows_;
  std::map<Dataset, BucketCatalog> catalogs_;
  std::map<BucketKey, std::vector<std::size_t>> members_;
  std::array<std::size_t, 3> counts_{};
  std::uint64_t window_length_ = 0;
  std::uint64_t max_tokens_ = 0;
};

/// Loads every dataset's record file and splits records into windows.
///
/// Records are `{id, dataset, bucket, tags, text | token_count}`, one per
/// line. A record whose text spans several windows yields ids `id#0`, `id#1`,
/// ...; a single-window record keeps its id.
Pool load_pool(const PoolManifest& manifest, const Tokenizer& tokenizer = WhitespaceTokenizer{});

}  // namespace mixsearch
