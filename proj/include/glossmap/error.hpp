#pragma once

#include <stdexcept>
#include <string>

namespace glossmap {

/// Coarse error category. The CLI maps these onto process exit codes.
enum class ErrorKind {
    validation,  // bad input or violated precondition (exit 2)
    io,          // filesystem / container problems (exit 3)
    numeric,     // undefined metric, degenerate fit, unusable exposure (exit 4)
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

enum class IoErrorCode {
    open_failed,
    unknown_container,
    corrupt_header,
    corrupt_data,
    bad_aspect,
    write_failed,
};

class IoError : public Error {
public:
    IoError(IoErrorCode code, const std::string& what) : Error(ErrorKind::io, what), code_(code) {}
    IoErrorCode code() const noexcept { return code_; }

private:
    IoErrorCode code_;
};

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::validation: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::numeric: return 4;
    }
    return 1;
}

}  // namespace glossmap
