#include "qkbench/util.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <set>

namespace qkbench {

namespace {
std::atomic<bool> g_quiet{false};
std::mutex g_warn_mutex;
std::set<std::string> g_seen;
}  // namespace

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void warn(const std::string &message) {
    if (g_quiet.load()) return;
    std::lock_guard lock(g_warn_mutex);
    if (!g_seen.insert(message).second) return;
    std::cerr << "[warn] " << message << '\n';
}

void set_quiet(bool quiet) { g_quiet.store(quiet); }

}  // namespace qkbench
