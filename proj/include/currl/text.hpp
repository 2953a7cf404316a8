#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace currl {

// The shared normalizer: split on runs of ASCII whitespace. Exact match, the
// filter's answer check and Sim all compare sequences produced by this.
std::vector<std::string> normalize_tokens(std::string_view text);

bool token_equal(std::string_view a, std::string_view b);

std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);

// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view data) noexcept;

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace currl
