#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace qprobe::detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::vector<std::string_view> lines(std::string_view s) {
    auto out = split(s, '\n');
    for (auto& line : out) {
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
    }
    return out;
}

/// Drops a trailing `# comment`.
inline std::string_view strip_comment(std::string_view s) {
    const auto pos = s.find('#');
    return pos == std::string_view::npos ? s : s.substr(0, pos);
}

/// Splits "a -> b" into its trimmed endpoints; false if there is no arrow.
inline bool split_arrow(std::string_view s, std::string_view& from, std::string_view& to) {
    const auto pos = s.find("->");
    if (pos == std::string_view::npos) {
        return false;
    }
    from = trim(s.substr(0, pos));
    to = trim(s.substr(pos + 2));
    return !from.empty() && !to.empty();
}

} // namespace qprobe::detail
