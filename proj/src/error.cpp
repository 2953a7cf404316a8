#include "currl/error.hpp"

namespace currl {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::argument: return "argument";
        case ErrorKind::parse: return "parse";
        case ErrorKind::integrity: return "integrity";
        case ErrorKind::transport: return "transport";
        case ErrorKind::protocol: return "protocol";
        case ErrorKind::format: return "format";
        case ErrorKind::generation: return "generation";
        case ErrorKind::state: return "state";
        case ErrorKind::numeric: return "numeric";
        case ErrorKind::config: return "config";
        case ErrorKind::construction: return "construction";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
    // 1 is reserved for unexpected (non-currl) failures.
    return 2 + static_cast<int>(kind);
}

const char* to_string(TagViolation v) noexcept {
    switch (v) {
        case TagViolation::missing_think: return "missing <think> block";
        case TagViolation::missing_answer: return "missing <answer> block";
        case TagViolation::duplicate_think: return "duplicate <think> block";
        case TagViolation::duplicate_answer: return "duplicate <answer> block";
        case TagViolation::unclosed_think: return "unclosed <think> tag";
        case TagViolation::unclosed_answer: return "unclosed <answer> tag";
        case TagViolation::out_of_order: return "tags out of order";
    }
    return "unknown tag violation";
}

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorKind::parse,
            line ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

IntegrityError::IntegrityError(const std::string& message, std::size_t line)
    : Error(ErrorKind::integrity,
            line ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

FormatError::FormatError(TagViolation violation)
    : Error(ErrorKind::format, std::string("format error: ") + to_string(violation)),
      violation_(violation) {}

}  // namespace currl
