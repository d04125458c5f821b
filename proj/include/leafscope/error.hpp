#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leafscope {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// geometry
class DegenerateBisector : public Error {
public:
    DegenerateBisector() : Error("bisector undefined for anti-parallel directions") {}
};

class DegenerateRotation : public Error {
public:
    DegenerateRotation() : Error("rotation between anti-parallel directions is not unique") {}
};

class GimbalDegenerate : public Error {
public:
    explicit GimbalDegenerate(const std::string& what = "normal is aligned with the vertical axis")
        : Error(what) {}
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

// file ingestion
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& field,
               const std::string& msg)
        : Error(source + ":" + std::to_string(line) + (field.empty() ? "" : " [" + field + "]") +
                ": " + msg),
          line_(line),
          field_(field) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// isolation
class EmptyCluster : public Error {
public:
    EmptyCluster() : Error("cluster has no members") {}
};

// focus
class NonPositiveDistance : public Error {
public:
    explicit NonPositiveDistance(double distance, std::size_t index = 0)
        : Error("distance must be positive, got " + std::to_string(distance) + " at element " +
                std::to_string(index)),
          distance_(distance),
          index_(index) {}

    double distance() const noexcept { return distance_; }
    std::size_t index() const noexcept { return index_; }

private:
    double distance_;
    std::size_t index_;
};

// spectral
class InsufficientSignal : public Error {
public:
    explicit InsufficientSignal(std::size_t usable)
        : Error("only " + std::to_string(usable) + " usable readings, need at least 3") {}
};

class SaturatedSweep : public Error {
public:
    explicit SaturatedSweep(std::size_t saturated)
        : Error(std::to_string(saturated) + " of 6 readings saturated") {}
};

}  // namespace leafscope
