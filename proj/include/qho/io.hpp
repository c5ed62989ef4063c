#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace qho::io {

// Shortest decimal string that round-trips to the same IEEE-754 double.
std::string format_double(double x);

// FNV-1a 64-bit, returned as fixed-width lowercase hex. Used to fingerprint
// written artifacts in run manifests.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

} // namespace qho::io
