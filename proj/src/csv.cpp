#include "vrclass/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "vrclass/error.hpp"

namespace vrclass::csv {

std::optional<Row> parse_line(std::string_view line) {
    Row fields;
    std::string current;
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (true) {
        current.clear();
        if (i < n && line[i] == '"') {
            ++i;
            bool closed = false;
            while (i < n) {
                if (line[i] == '"') {
                    if (i + 1 < n && line[i + 1] == '"') {
                        current.push_back('"');
                        i += 2;
                    } else {
                        ++i;
                        closed = true;
                        break;
                    }
                } else {
                    current.push_back(line[i++]);
                }
            }
            if (!closed || (i < n && line[i] != ',')) {
                return std::nullopt;
            }
        } else {
            while (i < n && line[i] != ',') {
                if (line[i] == '"') {
                    return std::nullopt;
                }
                current.push_back(line[i++]);
            }
        }
        fields.push_back(current);
        if (i >= n) {
            break;
        }
        ++i;  // comma
    }
    return fields;
}

std::optional<std::string> Reader::next_line() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_number_;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (skip_comments_ && (line.empty() || line.front() == '#')) {
            continue;
        }
        return line;
    }
    return std::nullopt;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join(const Row& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) {
            out.push_back(',');
        }
        out += escape(fields[i]);
    }
    return out;
}

std::string format_double(double value) {
    if (std::isnan(value)) {
        return {};
    }
    if (value == 0.0) {
        return "0";  // folds -0
    }
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view text) {
    if (text.empty()) {
        return std::nullopt;
    }
    if (text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::optional<long long> parse_int(std::string_view text) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::size_t Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw IngestError("missing column '" + std::string(name) + "'");
}

Table read_table(std::istream& in, bool skip_comments) {
    Reader reader(in, skip_comments);
    Table table;
    auto header = reader.next_line();
    if (!header) {
        throw IngestError("empty file: no header row");
    }
    auto parsed = parse_line(*header);
    if (!parsed) {
        throw IngestError("malformed header row");
    }
    table.header = std::move(*parsed);
    while (auto line = reader.next_line()) {
        if (line->empty()) {
            continue;
        }
        auto row = parse_line(*line);
        if (!row || row->size() != table.header.size()) {
            throw IngestError("malformed row at line " + std::to_string(reader.line_number()));
        }
        table.rows.push_back(std::move(*row));
    }
    return table;
}

Table read_table_file(const std::string& path, bool skip_comments) {
    std::ifstream in(path);
    if (!in) {
        throw IngestError("cannot open '" + path + "'");
    }
    return read_table(in, skip_comments);
}

}  // namespace vrclass::csv
