#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qkbench {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits. Stable across platforms.
std::string fnv1a_hex(std::string_view data);

/// Warnings go to stderr unless silenced. Each distinct message is printed once per process.
void warn(const std::string &message);
void set_quiet(bool quiet);

}  // namespace qkbench
