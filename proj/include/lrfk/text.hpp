#pragma once

// Small text helpers shared by file formats, manifests and the config reader.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lrfk {

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);
std::uint64_t parse_uint(std::string_view s);

// "3" or "1,-2"; surrounding parentheses are accepted.
std::vector<std::int64_t> parse_lattice_vector(std::string_view s);
std::string format_lattice_vector(std::span<const std::int64_t> v);

// Round-trippable shortest-ish representation (%.17g).
std::string format_double(double x);

// 64-bit FNV-1a; stable across platforms.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace lrfk
