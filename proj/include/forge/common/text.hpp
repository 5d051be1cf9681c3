#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Collapses every run of Unicode whitespace into one ASCII space and trims
// both ends.
std::string collapse_whitespace(std::string_view text);

std::string_view trim(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);

bool starts_with(std::string_view text, std::string_view prefix);

// Replaces CR/LF with spaces so the text fits one line of a line protocol.
std::string single_line(std::string_view text);

// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);

// Lines without terminators. A trailing newline does not produce an extra
// empty line; "\r\n" endings are accepted.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::vector<std::string> split_lines(std::string_view content);

// Writes via a temporary sibling and rename, so readers never see a torn
// file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines);

}  // namespace forge
