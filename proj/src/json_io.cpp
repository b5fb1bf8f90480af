#include "sciflow/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sciflow {

json parse_json_text(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is the 1-based offset of the character that failed.
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw SyntaxError(line, col, what);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string dump_document(const ordered_json& doc) { return doc.dump(2) + "\n"; }

double quantize(double value) noexcept {
  double q = std::round(value * 1e6) / 1e6;
  return q == 0.0 ? 0.0 : q;  // no negative zero
}

namespace jsonio {

std::string child(const std::string& path, std::string_view key) {
  std::string escaped;
  for (char c : key) {
    if (c == '~') escaped += "~0";
    else if (c == '/') escaped += "~1";
    else escaped += c;
  }
  return path + "/" + escaped;
}

std::string child(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

static std::string where(const std::string& path) { return path.empty() ? "/" : path; }

const json& require_object(const json& value, const std::string& path) {
  if (!value.is_object()) throw ParseError(where(path), "expected an object");
  return value;
}

const json& require_array(const json& value, const std::string& path) {
  if (!value.is_array()) throw ParseError(where(path), "expected an array");
  return value;
}

const json& require(const json& obj, std::string_view key, const std::string& path) {
  require_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where(path), "missing key '" + std::string(key) + "'");
  return *it;
}

std::string get_string(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string()) throw ParseError(child(path, key), "expected a string");
  return v.get<std::string>();
}

double get_number(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_number()) throw ParseError(child(path, key), "expected a number");
  return v.get<double>();
}

bool get_bool(const json& obj, std::string_view key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_boolean()) throw ParseError(child(path, key), "expected a boolean");
  return v.get<bool>();
}

std::optional<std::string> get_optional_string(const json& obj, std::string_view key, const std::string& path) {
  require_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(child(path, key), "expected a string");
  return it->get<std::string>();
}

std::optional<double> get_optional_number(const json& obj, std::string_view key, const std::string& path) {
  require_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw ParseError(child(path, key), "expected a number");
  return it->get<double>();
}

bool get_bool_or(const json& obj, std::string_view key, bool fallback, const std::string& path) {
  require_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) throw ParseError(child(path, key), "expected a boolean");
  return it->get<bool>();
}

void require_schema(const json& doc, std::string_view expected) {
  const auto version = get_string(doc, "schema_version", "");
  if (version != expected)
    throw VersionError("unsupported schema_version '" + version + "' (expected '" + std::string(expected) + "')");
}

}  // namespace jsonio
}  // namespace sciflow
