#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sciflow {

/// OCR-noise filter for node descriptions. Drops isolated single
/// characters, pure digit strings and subfigure markers such as "(a)", "b)"
/// or "c."; otherwise returns the trimmed text. Idempotent.
std::optional<std::string> filter_label(std::string_view text);

}  // namespace sciflow
