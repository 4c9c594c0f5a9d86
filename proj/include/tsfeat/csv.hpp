#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tsfeat::csv {

/// Streaming reader for comma-separated UTF-8 text with RFC 4180 quoting.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at end of input. Blank lines are skipped.
    std::optional<std::vector<std::string>> next();

    /// 1-based line number where the last returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

/// Writes one record, quoting fields that need it.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

std::string quote_if_needed(std::string_view field);

/// Shortest decimal text that reads back to the same double. Non-finite
/// values are written as NaN, Inf and -Inf.
std::string format_double(double v);

/// Parses a decimal number (also accepts NaN/Inf spellings). Returns nullopt
/// if the field is not a complete number.
std::optional<double> parse_double(std::string_view field);

std::optional<long long> parse_integer(std::string_view field);

}  // namespace tsfeat::csv
