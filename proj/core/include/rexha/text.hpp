#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rexha::text {

std::string_view trim(std::string_view s) noexcept;
bool is_blank(std::string_view s) noexcept;

// Clips to at most max_bytes without splitting a UTF-8 code point.
std::string clip_utf8(std::string_view s, std::size_t max_bytes);

// Text up to and including the first '.', '!' or '?', trimmed. Whole text
// when there is no terminator.
std::string first_sentence(std::string_view s);

// Lowercased ASCII alphanumeric runs; other bytes separate words.
std::vector<std::string> words(std::string_view s);

std::string join(std::span<const std::string> parts, std::string_view sep);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace rexha::text
