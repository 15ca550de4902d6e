#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prlab {

/// Base of everything the library throws on contract violations.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the operation's domain (n = 0, p outside (0,1), ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested data not available: checkpoint beyond a block, g(x) outside
/// the sieved range, schedule overrun.
class DataError : public Error {
public:
    using Error::Error;
};

/// Malformed block or key file.
class FormatError : public Error {
public:
    using Error::Error;
};

/// DSL text that does not parse or does not type-check.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace prlab
