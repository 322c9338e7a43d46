#include "mixsearch/corpus.hpp"

#include "mixsearch/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <set>

namespace mixsearch {

namespace fs = std::filesystem;

const BucketSpec* BucketCatalog::find(std::string_view bucket_id) const {
  for (const auto& b : buckets) {
    if (b.bucket_id == bucket_id) return &b;
  }
  return nullptr;
}

std::string BucketKey::str() const { return fmt::format("{}/{}", to_string(dataset), bucket_id); }

BucketKey BucketKey::parse(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) throw DataError(fmt::format("malformed bucket key '{}'", s));
  return {parse_dataset(s.substr(0, slash)), std::string(s.substr(slash + 1))};
}

namespace {

std::uint64_t positive_field(const Json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer() || j.at(key).get<std::int64_t>() < 1) {
    throw ConfigError(fmt::format("manifest field '{}' must be a positive integer", key));
  }
  return j.at(key).get<std::uint64_t>();
}

}  // namespace

PoolManifest read_pool_manifest(const fs::path& path) {
  const Json j = read_json_file(path);
  PoolManifest m;
  try {
    m.window_length = positive_field(j, "window_length", 4096);
    m.stride = positive_field(j, "stride", m.window_length);
    for (const auto& d : j.at("datasets")) {
      DatasetDescriptor desc;
      desc.id = parse_dataset(d.at("id").get<std::string>());
      desc.source = path.parent_path() / d.at("source").get<std::string>();
      desc.enumerations = d.at("enumerations").get<std::map<std::string, std::vector<std::string>>>();
      for (const auto& b : d.at("buckets")) {
        desc.buckets.push_back({b.at("id").get<std::string>(), b.at("slice").get<SliceDescriptor>()});
      }
      m.datasets.push_back(std::move(desc));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("'{}': invalid pool manifest: {}", path.string(), e.what()));
  }
  if (m.stride > m.window_length) {
    throw ConfigError(fmt::format("stride {} exceeds window_length {}", m.stride, m.window_length));
  }
  return m;
}

std::vector<WindowSpan> split_windows(std::uint64_t token_count, std::uint64_t window_length,
                                      std::uint64_t stride) {
  if (token_count < 1 || window_length < 1 || stride < 1) {
    throw ConfigError("split_windows: all arguments must be >= 1");
  }
  if (stride > window_length) {
    throw ConfigError(fmt::format("stride {} exceeds window_length {}", stride, window_length));
  }
  std::vector<WindowSpan> spans;
  for (std::uint64_t start = 0;; start += stride) {
    const std::uint64_t len = std::min(window_length, token_count - start);
    spans.push_back({start, len});
    if (start + len >= token_count) break;
  }
  return spans;
}

std::uint64_t WhitespaceTokenizer::count(std::string_view text) const {
  std::uint64_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::span<const std::size_t> Pool::members(const BucketKey& key) const {
  const auto it = members_.find(key);
  if (it == members_.end()) return {};
  return it->second;
}

const BucketCatalog& Pool::catalog(Dataset d) const {
  const auto it = catalogs_.find(d);
  if (it == catalogs_.end()) throw ContractError(fmt::format("pool has no dataset {}", to_string(d)));
  return it->second;
}

std::vector<BucketCatalog> Pool::catalogs() const {
  std::vector<BucketCatalog> out;
  for (const auto& [_, c] : catalogs_) out.push_back(c);
  return out;
}

std::uint64_t Pool::min_tokens(const BucketKey& key) const {
  std::uint64_t best = UINT64_MAX;
  for (std::size_t i : members(key)) best = std::min(best, windows_[i].token_count);
  return best;
}

namespace {

void validate_catalog(const DatasetDescriptor& desc) {
  if (desc.enumerations.empty()) {
    throw ConfigError(fmt::format("dataset {} declares no enumerations", to_string(desc.id)));
  }
  std::set<std::string> seen;
  for (const auto& b : desc.buckets) {
    if (!seen.insert(b.bucket_id).second) {
      throw ConfigError(fmt::format("dataset {}: duplicate bucket '{}'", to_string(desc.id), b.bucket_id));
    }
    for (const auto& [axis, value] : b.slice) {
      const auto it = desc.enumerations.find(axis);
      if (it == desc.enumerations.end() || std::find(it->second.begin(), it->second.end(), value) == it->second.end()) {
        throw ConfigError(fmt::format("dataset {}: bucket '{}' uses undeclared slice value {}={}",
                                      to_string(desc.id), b.bucket_id, axis, value));
      }
    }
  }
  for (const auto& [axis, values] : desc.enumerations) {
    if (values.empty()) {
      throw ConfigError(fmt::format("dataset {}: enumeration '{}' is empty", to_string(desc.id), axis));
    }
  }
}

}  // namespace

Pool load_pool(const PoolManifest& manifest, const Tokenizer& tokenizer) {
  if (manifest.stride < 1 || manifest.stride > manifest.window_length) {
    throw ConfigError("manifest stride must satisfy 1 <= stride <= window_length");
  }
  Pool pool;
  pool.window_length_ = manifest.window_length;
  std::set<std::string> ids;

  for (const auto& desc : manifest.datasets) {
    validate_catalog(desc);
    if (pool.catalogs_.contains(desc.id)) {
      throw ConfigError(fmt::format("dataset {} declared twice", to_string(desc.id)));
    }
    BucketCatalog catalog{desc.id, desc.buckets};
    const std::string source_name = desc.source.filename().string();

    for_each_jsonl(desc.source, [&](const Json& rec, std::size_t line_no) {
      std::string id;
      try {
        id = rec.at("id").get<std::string>();
        const Dataset ds = parse_dataset(rec.at("dataset").get<std::string>());
        if (ds != desc.id) {
          throw DataError(fmt::format("record '{}' in {} claims dataset {}", id, source_name, to_string(ds)));
        }
        const std::string bucket = rec.at("bucket").get<std::string>();
        if (catalog.find(bucket) == nullptr) {
          throw DataError(fmt::format("window '{}' references undeclared bucket '{}'", id, bucket));
        }
        std::map<std::string, std::string> tags;
        if (rec.contains("tags")) tags = rec.at("tags").get<std::map<std::string, std::string>>();

        std::uint64_t tokens = 0;
        if (rec.contains("text")) {
          tokens = tokenizer.count(rec.at("text").get<std::string>());
        } else if (rec.contains("token_count")) {
          const auto raw = rec.at("token_count").get<std::int64_t>();
          if (raw < 1) throw DataError(fmt::format("record '{}' has token_count {}", id, raw));
          tokens = static_cast<std::uint64_t>(raw);
        } else {
          throw DataError(fmt::format("record '{}' has neither text nor token_count", id));
        }
        if (tokens == 0) throw DataError(fmt::format("record '{}' has no tokens", id));

        const auto spans = split_windows(tokens, manifest.window_length, manifest.stride);
        for (std::size_t k = 0; k < spans.size(); ++k) {
          TrainingWindow w;
          w.window_id = spans.size() == 1 ? id : fmt::format("{}#{}", id, k);
          w.dataset = desc.id;
          w.bucket_id = bucket;
          w.token_count = spans[k].length;
          w.text_ref = fmt::format("{}:{}[{}+{}]", source_name, line_no, spans[k].start, spans[k].length);
          w.tags = tags;
          if (!ids.insert(w.window_id).second) {
            throw DataError(fmt::format("duplicate window id '{}'", w.window_id));
          }
          pool.max_tokens_ = std::max(pool.max_tokens_, w.token_count);
          pool.members_[{desc.id, bucket}].push_back(pool.windows_.size());
          pool.windows_.push_back(std::move(w));
          ++pool.counts_[index_of(desc.id)];
        }
      } catch (const Json::exception& e) {
        throw DataError(fmt::format("{} line {}: malformed record '{}': {}", source_name, line_no, id, e.what()));
      }
    });
    pool.catalogs_.emplace(desc.id, std::move(catalog));
  }
  return pool;
}

}  // namespace mixsearch
