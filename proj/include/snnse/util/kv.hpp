#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace snnse::util {

// Flat `key=value` text. Blank lines and lines starting with '#' are
// ignored; whitespace around keys and values is trimmed.
std::map<std::string, std::string> parse_key_values(std::string_view text);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

int parse_int(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

// SplitMix64 step; used to derive independent seeds from one base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace snnse::util
