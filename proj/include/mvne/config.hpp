#pragma once

// Flat key=value configuration text with dotted namespaces ("trainer.lr=0.001").

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace mvne {

using KeyValues = std::map<std::string, std::string>;

/// Parses "key=value" lines; blank lines and '#' comments are ignored.
KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values(const std::filesystem::path& path);
/// One "key=value" line per entry in key order.
std::string format_key_values(const KeyValues& kv);
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// Content hash of a file, 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

double kv_real(const KeyValues& kv, const std::string& key, double fallback);
std::uint64_t kv_uint(const KeyValues& kv, const std::string& key, std::uint64_t fallback);
bool kv_bool(const KeyValues& kv, const std::string& key, bool fallback);
std::string kv_string(const KeyValues& kv, const std::string& key, const std::string& fallback);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

}  // namespace mvne
