#include "tracefix/error.hpp"

namespace tracefix {

RowError::RowError(std::size_t line, const std::string& what)
    : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

XmlError::XmlError(std::size_t byte_offset, const std::string& what)
    : DataError("byte " + std::to_string(byte_offset) + ": " + what), offset_(byte_offset) {}

}  // namespace tracefix
