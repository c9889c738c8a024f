#pragma once

#include <stdexcept>
#include <string>

namespace hiflow {

enum class ErrorCode {
    InvalidArgument = 1,
    Format = 2,
    Io = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& message) {
    throw Error(ErrorCode::InvalidArgument, message);
}

[[noreturn]] inline void throw_format(const std::string& message) {
    throw Error(ErrorCode::Format, message);
}

[[noreturn]] inline void throw_io(const std::string& message) {
    throw Error(ErrorCode::Io, message);
}

}  // namespace hiflow
