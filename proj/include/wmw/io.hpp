#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wmw/trace.hpp"

namespace wmw {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Non-empty lines parsed as JSON values.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(std::span<const Json> rows);

std::vector<Trace> read_traces(const std::filesystem::path& path);
std::string traces_to_jsonl(std::span<const Trace> traces);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

/// Standard base64 with padding, no line breaks.
std::string base64_encode(std::string_view bytes);

}  // namespace wmw
