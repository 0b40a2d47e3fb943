#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace taskagg {

/// Broad failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
    usage,        ///< bad arguments or configuration
    validation,   ///< input data violates a documented schema or invariant
    computation,  ///< a numerical routine failed (sampler, degenerate bounds)
    capacity,     ///< a requested allocation cannot be satisfied
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Input file problem located at a 1-based row and a named column.
class ParseError : public Error {
  public:
    ParseError(std::string file, std::size_t row, std::string column, const std::string& what);

    const std::string& file() const noexcept { return file_; }
    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

  private:
    std::string file_;
    std::size_t row_;
    std::string column_;
};

class CapacityError : public Error {
  public:
    CapacityError(std::size_t requested_bytes, std::size_t available_bytes);

    std::size_t requested() const noexcept { return requested_; }
    std::size_t available() const noexcept { return available_; }

  private:
    std::size_t requested_;
    std::size_t available_;
};

inline Error usage_error(const std::string& what) { return {ErrorKind::usage, what}; }
inline Error validation_error(const std::string& what) { return {ErrorKind::validation, what}; }
inline Error computation_error(const std::string& what) { return {ErrorKind::computation, what}; }

}  // namespace taskagg
