#include "haze/errors.hpp"

#include <fmt/format.h>

namespace haze {

SyntaxError::SyntaxError(const std::string& message, std::size_t position, std::size_t line)
    : Error(line ? fmt::format("line {}, position {}: {}", line, position, message)
                 : fmt::format("position {}: {}", position, message)),
      detail_(message),
      position_(position),
      line_(line) {}

namespace {

std::string describe(const std::string& file, std::size_t row, const std::string& column,
                     const std::string& message) {
    std::string where = file.empty() ? std::string{} : file + ":";
    if (row) where += fmt::format("row {}:", row);
    if (!column.empty()) where += fmt::format(" column '{}':", column);
    return where.empty() ? message : where + " " + message;
}

}  // namespace

FormatError::FormatError(const std::string& file, std::size_t row, const std::string& column,
                         const std::string& message)
    : Error(describe(file, row, column, message)), detail_(message), row_(row), column_(column) {}

}  // namespace haze
