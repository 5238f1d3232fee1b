#pragma once

#include "gridfreq/network.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace gridfreq {

/// Reads and validates a JSON case file. Parse problems raise ParseError with
/// the offending field; model violations raise ValidationError.
Network load_case(const std::filesystem::path& path);
Network parse_case(std::string_view text);

/// Serializes a network back to the case schema (canonical node order).
std::string serialize_case(const Network& net);
void save_case(const Network& net, const std::filesystem::path& path);

}  // namespace gridfreq
