#pragma once

#include <stdexcept>
#include <string>

namespace drm {

enum class ErrorCode {
    Unreadable,
    UnsupportedFormat,
    ZeroDimension,
    Io,
    InvalidArgument,
    ShapeMismatch,
    NotConverged,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by CG when the residual target is not met; carries the final residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(ErrorCode::NotConverged, what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace drm
