#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srag {

/// Root of the library's error hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem / serialization failures (missing files, bad headers, checksums).
class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid arguments or violated preconditions.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Grammar violation while parsing structured text; carries the character
/// offset where parsing failed.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Remote call failed at the transport level (connection, HTTP status) even
/// after retries.
class TransportError : public Error {
public:
    using Error::Error;
};

/// Remote call succeeded at the transport level but the body violated the
/// expected schema even after retries.
class ContentError : public Error {
public:
    using Error::Error;
};

/// Judge returned a numeric score outside the accepted range after retries.
class RangeError : public ContentError {
public:
    using ContentError::ContentError;
};

} // namespace srag
