#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vrclass::csv {

using Row = std::vector<std::string>;

/// Splits one line into fields. Supports RFC 4180 quoting within a line.
/// Returns nullopt for an unterminated quote or stray characters after a
/// closing quote.
std::optional<Row> parse_line(std::string_view line);

/// Line-oriented reader. Strips trailing CR; optionally skips '#' comment lines
/// and blank lines.
class Reader {
  public:
    explicit Reader(std::istream& in, bool skip_comments = false) : in_(in), skip_comments_(skip_comments) {}

    /// Next raw line, or nullopt at end of input.
    std::optional<std::string> next_line();

    /// 1-based number of the line last returned.
    std::size_t line_number() const { return line_number_; }

  private:
    std::istream& in_;
    bool skip_comments_;
    std::size_t line_number_ = 0;
};

/// Quotes a field only when it contains a delimiter, quote or newline.
std::string escape(std::string_view field);

std::string join(const Row& fields);

/// Shortest decimal string that round-trips to the same double. NaN prints as "".
std::string format_double(double value);

/// Full-string parse of a decimal number. Empty or partial input gives nullopt.
std::optional<double> parse_double(std::string_view text);

std::optional<long long> parse_int(std::string_view text);

/// Whole-file parse: header plus rows. Used for the simple artifact files.
struct Table {
    Row header;
    std::vector<Row> rows;

    /// Index of a header column; throws IngestError if absent.
    std::size_t column(std::string_view name) const;
};

Table read_table(std::istream& in, bool skip_comments = true);
Table read_table_file(const std::string& path, bool skip_comments = true);

}  // namespace vrclass::csv
