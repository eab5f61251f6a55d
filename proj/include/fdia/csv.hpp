#ifndef FDIA_CSV_HPP
#define FDIA_CSV_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fdia/error.hpp"

namespace fdia {

// Shortest decimal that round-trips to the exact same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const char* context = "number") {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ParseError(std::string("invalid ") + context + ": '" + std::string(text) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

} // namespace fdia

#endif
