#pragma once

#include <stdexcept>
#include <string>

namespace evpr {

/// Base of all library errors. `exit_code` follows the CLI convention:
/// 2 config error, 3 data error, 4 internal invariant violation.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what, 2) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what, 3) {}
};

class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(what, 4) {}
};

// Rethrows `e` with `context` prepended, preserving the error category.
[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context);

}  // namespace evpr
