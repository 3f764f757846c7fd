#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ipvsim {

/// Writes `content` to a temporary sibling file and renames it over `path`.
void write_text_atomic(const std::filesystem::path &path, std::string_view content);

std::string read_text(const std::filesystem::path &path);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Fixed-point with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// Parses a complete token as a double; throws ValidationError otherwise.
double parse_double(std::string_view token);

/// 64-bit FNV-1a digest rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

} // namespace ipvsim
