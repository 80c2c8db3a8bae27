#pragma once

#include <stdexcept>
#include <string>

namespace mlcpgd {

// Machine-readable failure categories. Every throwing operation documents
// which of these it can raise; tests match on the code, not the message.
enum class Errc {
    // road profile validation
    NonMonotoneTransitions,
    LevelOutOfRange,
    RedundantTransition,
    AlphaBelowOne,
    // state queries
    EmptyInterval,
    UnsortedGrid,
    // event engine
    NegativeDt,
    EventSkipped,
    NotInContact,
    WrongDirection,
    NegativeOffset,
    CouplingNotComplete,
    InadmissibleState,
    StalledSimulation,
    // initial data
    IncompatibleData,
    NonPositiveK,
    ParseError,
    ValidationError,
    // quadrature / test functions
    InvalidRadii,
    QuadratureNotConverged,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace mlcpgd
