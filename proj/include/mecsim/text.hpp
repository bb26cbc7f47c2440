#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mecsim/error.hpp"

namespace mecsim {

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

/// Shortest round-trip decimal form. Used everywhere numbers are serialized so
/// that output bytes do not depend on locale or iostream state.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Hexfloat form: exact bit pattern, survives text round-trips unchanged.
inline std::string format_double_hex(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

inline double parse_double_hex(std::string_view s, std::string_view what) {
    const auto t = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v, std::chars_format::hex);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        fail(Errc::InvalidArgument, "not a hexfloat for " + std::string(what) + ": '" + std::string(s) + "'");
    return v;
}

inline std::string format_int(std::int64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view what) {
    const auto t = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        fail(Errc::InvalidArgument, "not a number for " + std::string(what) + ": '" + std::string(s) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view s, std::string_view what) {
    const auto t = trim(s);
    std::int64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        fail(Errc::InvalidArgument, "not an integer for " + std::string(what) + ": '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    const auto t = trim(s);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        fail(Errc::InvalidArgument, "not an unsigned integer for " + std::string(what) + ": '" + std::string(s) + "'");
    return v;
}

inline bool parse_bool(std::string_view s, std::string_view what) {
    const auto t = to_lower(trim(s));
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    fail(Errc::InvalidArgument, "not a boolean for " + std::string(what) + ": '" + std::string(s) + "'");
}

}  // namespace mecsim
