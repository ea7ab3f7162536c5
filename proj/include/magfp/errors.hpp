#pragma once

#include <stdexcept>
#include <string>

namespace magfp {

/// Base class for every error this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// |a| too small to define a vertical direction.
struct DegenerateGravity : Error {
    using Error::Error;
};

/// Sensor log contains no samples.
struct EmptyLog : Error {
    using Error::Error;
};

/// Marker timestamp falls outside the log's time range (plus slack).
struct MarkerOutOfRange : Error {
    using Error::Error;
};

struct DuplicatePathId : Error {
    using Error::Error;
};

struct EmptyPath : Error {
    using Error::Error;
};

/// Requested window length below the minimum of 2.
struct WindowTooShort : Error {
    using Error::Error;
};

/// Malformed CSV content; `line` is the 1-based line number.
struct ParseError : Error {
    int line;
    ParseError(const std::string& what, int line_)
        : Error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

/// CSV header does not match the expected schema; `column` names the culprit.
struct SchemaError : Error {
    std::string column;
    SchemaError(const std::string& what, std::string column_)
        : Error(what), column(std::move(column_)) {}
};

struct EmptyMap : Error {
    using Error::Error;
};

/// Sequences that must agree in length do not.
struct LengthMismatch : Error {
    using Error::Error;
};

struct EmptyCandidates : Error {
    using Error::Error;
};

struct EmptySequence : Error {
    using Error::Error;
};

/// A query position (or generated point) sits on top of a field source.
struct SourceCollision : Error {
    using Error::Error;
};

/// Requested survey cannot be laid out inside the floor bounds.
struct FloorOverflow : Error {
    using Error::Error;
};

/// A warp would leave fewer than two points, or touch an endpoint.
struct DegenerateWindow : Error {
    using Error::Error;
};

}  // namespace magfp
