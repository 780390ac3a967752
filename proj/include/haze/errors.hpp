#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace haze {

// Root of every error the library raises. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& message, std::size_t position, std::size_t line = 0);

    std::size_t position() const noexcept { return position_; }
    // 1-based line in a taxonomy file, 0 when parsing a bare rule string.
    std::size_t line() const noexcept { return line_; }
    // Message without the location prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t position_;
    std::size_t line_;
};

class FormatError : public Error {
public:
    FormatError(const std::string& file, std::size_t row, const std::string& column,
                const std::string& message);

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t row_;
    std::string column_;
};

class DuplicateKey : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class DegenerateSeries : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class EmptyDistribution : public Error {
public:
    using Error::Error;
};

class EmptyClass : public Error {
public:
    using Error::Error;
};

class MissingSubdistricts : public Error {
public:
    using Error::Error;
};

}  // namespace haze
