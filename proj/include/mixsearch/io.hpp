#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mixsearch {

using Json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);

/// Parses a JSON document; errors name the path.
Json read_json_file(const std::filesystem::path& path);

/// Calls `fn(record, line_number)` for every non-blank line of a JSON-lines file.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& fn);

/// Writes via a temporary file and rename, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Stable serialization: sorted keys, two-space indent, trailing newline.
std::string dump_pretty(const Json& j);

/// One compact record per line.
std::string dump_lines(const std::vector<Json>& records);

}  // namespace mixsearch
