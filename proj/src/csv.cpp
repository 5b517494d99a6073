#include "aead/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

#include <fmt/core.h>

#include "aead/error.hpp"

namespace aead::csv {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool needs_quotes(std::string_view s) {
    return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

}  // namespace

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    if (!std::getline(in_, line)) {
        return false;
    }
    ++line_;
    record_line_ = line_;
    if (line_ == 1 && line.starts_with("\xEF\xBB\xBF")) {
        line.erase(0, 3);
    }

    std::string field;
    bool in_quotes = false;
    for (;;) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field.push_back('"');
                        ++i;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"') {
                in_quotes = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else if (c == '\r' && i + 1 == line.size()) {
                // CRLF
            } else {
                field.push_back(c);
            }
        }
        if (!in_quotes) break;
        // Quoted field continues on the next physical line.
        if (!std::getline(in_, line)) {
            throw FormatError(fmt::format("unterminated quoted field starting on line {}",
                                          record_line_));
        }
        ++line_;
        field.push_back('\n');
    }
    fields.push_back(std::move(field));
    return true;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        const auto& f = fields[i];
        if (needs_quotes(f)) {
            out << '"';
            for (char c : f) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << f;
        }
    }
    out << '\n';
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

ParsedNumber parse_double(std::string_view text) {
    const auto s = trim(text);
    if (s.empty()) {
        return {ParseStatus::Blank, 0.0};
    }
    double value = 0.0;
    const bool hex = s.size() > 2 && (s.starts_with("0x") || s.starts_with("-0x") ||
                                      s.starts_with("0X") || s.starts_with("-0X"));
    if (hex) {
        // from_chars has no 0x-prefixed hex form; strtod does.
        std::string owned(s);
        char* end = nullptr;
        value = std::strtod(owned.c_str(), &end);
        if (end != owned.c_str() + owned.size()) return {ParseStatus::Invalid, 0.0};
        return {ParseStatus::Ok, value};
    }
    const char* begin = s.data();
    if (*begin == '+') ++begin;
    const auto res = std::from_chars(begin, s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        return {ParseStatus::Invalid, 0.0};
    }
    return {ParseStatus::Ok, value};
}

std::optional<std::size_t> find_column(std::span<const std::string> header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return i;
    }
    return std::nullopt;
}

}  // namespace aead::csv
