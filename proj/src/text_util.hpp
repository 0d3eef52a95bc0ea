#pragma once

// Small text helpers shared by the CSV readers.

#include <charconv>
#include <string_view>
#include <system_error>
#include <vector>

namespace evdiv::text {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end && !s.empty();
}

// Looks up `key` among space-separated key=value tokens.
inline bool header_value(std::string_view header, std::string_view key, std::string_view& value) {
    for (auto token : split(header, ' ')) {
        const auto eq = token.find('=');
        if (eq == std::string_view::npos) continue;
        if (token.substr(0, eq) == key) {
            value = token.substr(eq + 1);
            return true;
        }
    }
    return false;
}

// Calls fn(line_number, trimmed_line) for every non-empty line.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (!line.empty()) fn(line_no, line);
    }
}

}  // namespace evdiv::text
