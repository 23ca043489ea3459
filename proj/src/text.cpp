#include "callfuse/text.hpp"

#include "callfuse/error.hpp"

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace callfuse {

std::optional<std::size_t> CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name)
            return i;
    }
    return std::nullopt;
}

CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;

    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;
    std::size_t line = 1;
    std::size_t record_line = 1;
    std::size_t quote_line = 0;

    auto finish_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto finish_record = [&] {
        finish_field();
        const bool blank = record.size() == 1 && record[0].empty() && !record_has_content;
        if (!blank) {
            records.push_back(std::move(record));
            record_lines.push_back(record_line);
        }
        record.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n')
                    ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty() || field_was_quoted)
                throw ParseError("unexpected quote inside unquoted CSV field", line);
            in_quotes = true;
            field_was_quoted = true;
            record_has_content = true;
            quote_line = line;
            break;
        case ',':
            record_has_content = true;
            finish_field();
            break;
        case '\r':
            break;
        case '\n':
            finish_record();
            ++line;
            record_line = line;
            break;
        default:
            if (field_was_quoted)
                throw ParseError("text after closing quote in CSV field", line);
            field += c;
            record_has_content = true;
        }
    }
    if (in_quotes)
        throw ParseError("unterminated quoted CSV field", quote_line);
    if (record_has_content || !field.empty() || !record.empty())
        finish_record();

    if (records.empty())
        return table;
    table.header = std::move(records.front());
    for (auto& name : table.header)
        name = std::string(trim(name));
    table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    table.row_lines.assign(record_lines.begin() + 1, record_lines.end());
    return table;
}

std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_line(const std::vector<std::string>& fields)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out += ',';
        out += csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

std::string format_double(double value)
{
    std::array<char, 64> buffer{};
    auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    if (ec != std::errc{})
        throw Error("cannot format number");
    return std::string(buffer.data(), end);
}

std::string format_fixed(double value, int digits)
{
    std::array<char, 64> buffer{};
    auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value,
                                   std::chars_format::fixed, digits);
    if (ec != std::errc{})
        throw Error("cannot format number");
    std::string out(buffer.data(), end);
    // Avoid "-0.000" for tiny negatives.
    if (out.starts_with('-') && out.find_first_not_of("-0.") == std::string::npos)
        out.erase(0, 1);
    return out;
}

std::optional<double> parse_double(std::string_view text)
{
    text = trim(text);
    if (text.empty())
        return std::nullopt;
    if (text.front() == '+')
        text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view text)
{
    text = trim(text);
    if (text.empty())
        return std::nullopt;
    if (text.front() == '+')
        text.remove_prefix(1);
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        return std::nullopt;
    return value;
}

std::string_view trim(std::string_view text)
{
    constexpr std::string_view whitespace = " \t\r\n\f\v";
    const auto first = text.find_first_not_of(whitespace);
    if (first == std::string_view::npos)
        return {};
    const auto last = text.find_last_not_of(whitespace);
    return text.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char separator)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(separator, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, std::string_view contents)
{
    const std::filesystem::path target(path);
    if (target.has_parent_path())
        std::filesystem::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace callfuse
