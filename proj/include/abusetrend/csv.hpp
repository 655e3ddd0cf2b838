#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace abusetrend::csv {

// One parsed record and the physical line on which it started (1-based).
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC 4180 reader: comma separated, double-quoted fields may contain commas,
// doubled quotes and line breaks. CRLF is accepted.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns std::nullopt at end of input. Blank lines are skipped.
  std::optional<Record> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Column lookup for a header row. Names are compared after trimming
// surrounding whitespace; a UTF-8 BOM on the first name is ignored.
class Header {
 public:
  explicit Header(const Record& header_row);

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
};

std::string quote_if_needed(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

// Strict numeric parsing of a whole field (surrounding spaces allowed).
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_integer(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace abusetrend::csv
