#include "tracefix/csv.hpp"

#include "tracefix/error.hpp"

namespace tracefix::csv {

std::optional<std::vector<std::string>> Reader::next() {
  while (true) {
    int c = in_.peek();
    if (c == std::char_traits<char>::eof()) return std::nullopt;
    if (c == '\n') {
      in_.get();
      ++line_;
      continue;
    }
    if (c == '\r') {
      in_.get();
      continue;
    }
    break;
  }

  record_line_ = line_;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool field_was_quoted = false;
  while (true) {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw RowError(record_line_, "unterminated quoted field");
      fields.push_back(std::move(field));
      return fields;
    }
    char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case ',':
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
        break;
      case '"':
        if (!field.empty() || field_was_quoted)
          throw RowError(line_, "quote inside unquoted field");
        quoted = true;
        field_was_quoted = true;
        break;
      case '\r':
        if (in_.peek() == '\n') break;
        field.push_back(ch);
        break;
      case '\n':
        ++line_;
        fields.push_back(std::move(field));
        return fields;
      default:
        if (field_was_quoted) throw RowError(line_, "characters after closing quote");
        field.push_back(ch);
    }
  }
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << quote(fields[i]);
  }
  out << '\n';
}

}  // namespace tracefix::csv
