#include "sciflow/labels.hpp"

#include <algorithm>
#include <cctype>

namespace sciflow {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

bool is_subfigure_marker(std::string_view s) {
  // Optional '(' , one letter, optional ')', optional '.'
  std::size_t i = 0;
  const bool open = i < s.size() && s[i] == '(';
  if (open) ++i;
  if (i >= s.size() || !std::isalpha(static_cast<unsigned char>(s[i]))) return false;
  ++i;
  const bool close = i < s.size() && s[i] == ')';
  if (close) ++i;
  if (open && !close) return false;
  if (i < s.size() && s[i] == '.') ++i;
  return i == s.size();
}

}  // namespace

std::optional<std::string> filter_label(std::string_view text) {
  auto begin = std::find_if_not(text.begin(), text.end(), [](char c) { return is_space(static_cast<unsigned char>(c)); });
  auto end = std::find_if_not(text.rbegin(), std::make_reverse_iterator(begin),
                              [](char c) { return is_space(static_cast<unsigned char>(c)); })
                 .base();
  const std::string_view trimmed(begin, static_cast<std::size_t>(end - begin));
  if (trimmed.empty() || trimmed.size() == 1) return std::nullopt;
  if (std::all_of(trimmed.begin(), trimmed.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return std::nullopt;
  if (is_subfigure_marker(trimmed)) return std::nullopt;
  return std::string(trimmed);
}

}  // namespace sciflow
