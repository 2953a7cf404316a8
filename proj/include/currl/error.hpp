#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace currl {

// Every failure the library raises is a currl::Error. The kind maps onto the
// CLI exit code, so callers can tell error classes apart without RTTI.
enum class ErrorKind {
    argument,
    parse,
    integrity,
    transport,
    protocol,
    format,
    generation,
    state,
    numeric,
    config,
    construction,
};

const char* to_string(ErrorKind kind) noexcept;
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define CURRL_DEFINE_ERROR(Name, Kind)                                  \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& message)                       \
            : Error(ErrorKind::Kind, message) {}                        \
    };

CURRL_DEFINE_ERROR(ArgumentError, argument)
CURRL_DEFINE_ERROR(TransportError, transport)
CURRL_DEFINE_ERROR(ProtocolError, protocol)
CURRL_DEFINE_ERROR(StateError, state)
CURRL_DEFINE_ERROR(NumericError, numeric)
CURRL_DEFINE_ERROR(ConfigError, config)
CURRL_DEFINE_ERROR(ConstructionError, construction)

#undef CURRL_DEFINE_ERROR

// Line numbers are 1-based; 0 means "not tied to a line".
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IntegrityError : public Error {
public:
    explicit IntegrityError(const std::string& message, std::size_t line = 0);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class TagViolation {
    missing_think,
    missing_answer,
    duplicate_think,
    duplicate_answer,
    unclosed_think,
    unclosed_answer,
    out_of_order,
};

const char* to_string(TagViolation v) noexcept;

class FormatError : public Error {
public:
    explicit FormatError(TagViolation violation);
    TagViolation violation() const noexcept { return violation_; }

private:
    TagViolation violation_;
};

class GenerationError : public Error {
public:
    GenerationError(const std::string& message, std::string last_raw)
        : Error(ErrorKind::generation, message), last_raw_(std::move(last_raw)) {}
    const std::string& last_raw() const noexcept { return last_raw_; }

private:
    std::string last_raw_;
};

}  // namespace currl
