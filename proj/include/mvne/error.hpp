#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mvne {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Training produced a NaN or infinite loss.
class NumericalError : public Error {
public:
    NumericalError(std::size_t epoch, double loss)
        : Error("non-finite loss " + std::to_string(loss) + " at epoch " + std::to_string(epoch)),
          epoch_(epoch),
          loss_(loss) {}
    std::size_t epoch() const noexcept { return epoch_; }
    double loss() const noexcept { return loss_; }

private:
    std::size_t epoch_;
    double loss_;
};

}  // namespace mvne
