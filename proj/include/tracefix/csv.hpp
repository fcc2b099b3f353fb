#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace tracefix::csv {

// RFC-4180 record reader: comma separated, double-quote quoting with "" escapes,
// quoted fields may span lines. Accepts CRLF or LF line endings.
class Reader {
public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Returns the next record, or nullopt at end of input. Blank lines are skipped.
  std::optional<std::vector<std::string>> next();

  // 1-based line number on which the most recently returned record started.
  std::size_t line() const noexcept { return record_line_; }

private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string quote(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace tracefix::csv
