#pragma once

// Shared helpers for the JSON-backed document formats. Every accessor reports
// failures as ParseError located by JSON pointer.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "sciflow/error.hpp"

namespace sciflow {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Parses UTF-8 JSON text; syntax errors carry a `line:col` location.
json parse_json_text(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames, so readers never observe a
/// half-written file.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Canonical text form: two-space indentation, trailing newline.
std::string dump_document(const ordered_json& doc);

/// Rounds to 6 decimal places, the precision of every serialized number.
double quantize(double value) noexcept;

namespace jsonio {

std::string child(const std::string& path, std::string_view key);
std::string child(const std::string& path, std::size_t index);

const json& require(const json& obj, std::string_view key, const std::string& path);
const json& require_object(const json& value, const std::string& path);
const json& require_array(const json& value, const std::string& path);
std::string get_string(const json& obj, std::string_view key, const std::string& path);
double get_number(const json& obj, std::string_view key, const std::string& path);
bool get_bool(const json& obj, std::string_view key, const std::string& path);
std::optional<std::string> get_optional_string(const json& obj, std::string_view key, const std::string& path);
std::optional<double> get_optional_number(const json& obj, std::string_view key, const std::string& path);
bool get_bool_or(const json& obj, std::string_view key, bool fallback, const std::string& path);

/// Checks `schema_version`: missing or non-string is a ParseError, a
/// different value is a VersionError.
void require_schema(const json& doc, std::string_view expected);

}  // namespace jsonio
}  // namespace sciflow
