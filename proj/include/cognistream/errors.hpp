#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cognistream {

enum class Errc {
    EmptySegment,
    TimestampRegression,
    UnknownSegment,
    BadArity,
    UnknownDelimiter,
    ArityMismatch,
    NotMergeable,
    UnknownNode,
    BadPosition,
    WindowRegression,
    UnknownSubject,
    NoTemplates,
    NoQuorum,
    TooShort,
    NotASlot,
    NoKeywords,
    BadConfig,
    IoError,
    OwnershipViolation,
};

inline std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::EmptySegment: return "EmptySegment";
        case Errc::TimestampRegression: return "TimestampRegression";
        case Errc::UnknownSegment: return "UnknownSegment";
        case Errc::BadArity: return "BadArity";
        case Errc::UnknownDelimiter: return "UnknownDelimiter";
        case Errc::ArityMismatch: return "ArityMismatch";
        case Errc::NotMergeable: return "NotMergeable";
        case Errc::UnknownNode: return "UnknownNode";
        case Errc::BadPosition: return "BadPosition";
        case Errc::WindowRegression: return "WindowRegression";
        case Errc::UnknownSubject: return "UnknownSubject";
        case Errc::NoTemplates: return "NoTemplates";
        case Errc::NoQuorum: return "NoQuorum";
        case Errc::TooShort: return "TooShort";
        case Errc::NotASlot: return "NotASlot";
        case Errc::NoKeywords: return "NoKeywords";
        case Errc::BadConfig: return "BadConfig";
        case Errc::IoError: return "IoError";
        case Errc::OwnershipViolation: return "OwnershipViolation";
    }
    return "Unknown";
}

// Data-level failure: surfaced by the CLI as "module: Name: detail", exit 2.
class Error : public std::runtime_error {
  public:
    Error(Errc code, std::string module, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
          code_(code),
          module_(std::move(module)) {}

    Errc code() const { return code_; }
    const std::string& module() const { return module_; }

  private:
    Errc code_;
    std::string module_;
};

[[noreturn]] inline void raise(Errc code, std::string module, const std::string& detail) {
    throw Error(code, std::move(module), detail);
}

}  // namespace cognistream
