#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aead::csv {

/// Streaming reader for comma-separated text with optional double-quoted
/// fields ("" escapes a quote, quoted fields may span lines). CRLF and LF
/// line endings are both accepted.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Reads the next record into `fields`. Returns false at end of input.
    /// Throws FormatError on an unterminated quoted field.
    bool next(std::vector<std::string>& fields);

    /// 1-based line number where the last returned record started.
    std::size_t line() const { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

void write_row(std::ostream& out, std::span<const std::string> fields);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

enum class ParseStatus { Ok, Blank, Invalid };

struct ParsedNumber {
    ParseStatus status;
    double value;
};

/// Parses a decimal or hex-float number, ignoring surrounding whitespace.
ParsedNumber parse_double(std::string_view text);

/// Index of `name` in `header`, if present.
std::optional<std::size_t> find_column(std::span<const std::string> header, std::string_view name);

}  // namespace aead::csv
