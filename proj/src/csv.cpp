#include "tsfeat/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace tsfeat::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::optional<std::vector<std::string>> Reader::next() {
    std::string line;
    for (;;) {
        if (!std::getline(in_, line)) return std::nullopt;
        ++line_;
        if (line_ == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) break;
    }
    record_line_ = line_;

    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    std::size_t i = 0;
    for (;;) {
        if (i == line.size()) {
            if (quoted) {
                // Quoted field spans a line break.
                std::string more;
                if (!std::getline(in_, more)) break;
                ++line_;
                if (!more.empty() && more.back() == '\r') more.pop_back();
                field += '\n';
                line = std::move(more);
                i = 0;
                continue;
            }
            break;
        }
        const char c = line[i++];
        if (quoted) {
            if (c == '"') {
                if (i < line.size() && line[i] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string quote_if_needed(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << quote_if_needed(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

std::optional<double> parse_double(std::string_view field) {
    field = trim(field);
    if (field.empty()) return std::nullopt;
    if (field == "NaN" || field == "nan" || field == "NA" || field == "NAN") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (field == "Inf" || field == "inf" || field == "+Inf" || field == "Infinity") {
        return std::numeric_limits<double>::infinity();
    }
    if (field == "-Inf" || field == "-inf" || field == "-Infinity") {
        return -std::numeric_limits<double>::infinity();
    }
    if (field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) return std::nullopt;
    return v;
}

std::optional<long long> parse_integer(std::string_view field) {
    field = trim(field);
    if (field.empty()) return std::nullopt;
    if (field.front() == '+') field.remove_prefix(1);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec == std::errc{} && ptr == field.data() + field.size()) return v;
    // Accept integral reals such as "3.0".
    auto d = parse_double(field);
    if (!d || !std::isfinite(*d) || std::floor(*d) != *d || std::fabs(*d) > 9.0e15) return std::nullopt;
    return static_cast<long long>(*d);
}

}  // namespace tsfeat::csv
