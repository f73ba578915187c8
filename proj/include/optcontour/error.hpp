#pragma once

#include <stdexcept>
#include <string>

namespace optcontour {

/// Machine-readable failure categories. The numeric values double as CLI exit codes.
enum class ErrorCode : int {
    syntax = 3,
    unknown_function = 4,
    out_of_range = 5,
    no_enclosing_walk = 6,
    size_guard = 7,
    circle_singularity = 8,
    zero_derivative = 9,
    no_segments = 10,
    extent_search = 11,
    invalid_argument = 12,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::syntax: return "syntax";
        case ErrorCode::unknown_function: return "unknown_function";
        case ErrorCode::out_of_range: return "out_of_range";
        case ErrorCode::no_enclosing_walk: return "no_enclosing_walk";
        case ErrorCode::size_guard: return "size_guard";
        case ErrorCode::circle_singularity: return "circle_singularity";
        case ErrorCode::zero_derivative: return "zero_derivative";
        case ErrorCode::no_segments: return "no_segments";
        case ErrorCode::extent_search: return "extent_search";
        case ErrorCode::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure with the byte offset into the source text.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t offset, const std::string& what)
        : Error(code, what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace optcontour
