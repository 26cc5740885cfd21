#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psfg {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration (bad layer chain, empty label set, bad split, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Matrix/layout dimension mismatch.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Malformed dataset input (bad IDX magic, label out of range, ...).
class DataError : public Error {
public:
    using Error::Error;
};

// Wire-format violation while decoding; carries the byte offset of the fault.
class DecodeError : public Error {
public:
    DecodeError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Protocol contract violation (digest mismatch, missing contributions, ...).
class ProtocolError : public Error {
public:
    using Error::Error;
};

// Step gap in a message stream. Fatal: a missed update makes the
// reconstructed generator unrecoverable.
class DesyncError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

// Metric undefined for the given inputs (zero reference energy, d > 2, ...).
class MetricError : public Error {
public:
    using Error::Error;
};

} // namespace psfg
