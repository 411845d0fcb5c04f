#pragma once

#include <stdexcept>
#include <string>

namespace hbt {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCode {
    config = 2,
    validation = 3,
    convergence = 4,
    io = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_config(const std::string& msg) {
    throw Error(ErrorCode::config, msg);
}

[[noreturn]] inline void throw_validation(const std::string& msg) {
    throw Error(ErrorCode::validation, msg);
}

[[noreturn]] inline void throw_convergence(const std::string& msg) {
    throw Error(ErrorCode::convergence, msg);
}

[[noreturn]] inline void throw_io(const std::string& msg) {
    throw Error(ErrorCode::io, msg);
}

}  // namespace hbt
