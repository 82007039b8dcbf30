#pragma once

#include <stdexcept>
#include <string>

namespace pathkg {

enum class ErrorKind {
    Parse,         // malformed input line / field
    Config,        // invalid configuration value
    Validation,    // structurally valid input that violates a contract
    Io,            // filesystem failure
    Incompatible,  // checkpoint does not match the live session
    Internal,      // broken internal invariant
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error parse_error(const std::string& file, size_t line, const std::string& what) {
    return Error(ErrorKind::Parse, file + ":" + std::to_string(line) + ": " + what);
}

}  // namespace pathkg
