#pragma once

#include <stdexcept>
#include <string>

namespace loomlab {

enum class ErrorCode {
    domain,            // argument outside the mathematical domain
    validation,        // surface spec fails the loom conditions
    degenerate_trace,  // tangent runs along a boundary geodesic
    decomposition,     // element outside the open Bruhat cell
    precondition,      // caller broke an operation precondition
    parse,             // malformed input file
    undefined_measure, // empirical measure with zero occupation time
    io,
};

inline const char* code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::validation: return "validation";
    case ErrorCode::degenerate_trace: return "degenerate_trace";
    case ErrorCode::decomposition: return "decomposition";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::parse: return "parse";
    case ErrorCode::undefined_measure: return "undefined_measure";
    case ErrorCode::io: return "io";
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

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

} // namespace loomlab
