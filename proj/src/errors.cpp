#include "mlcpgd/errors.hpp"

namespace mlcpgd {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::NonMonotoneTransitions: return "NonMonotoneTransitions";
        case Errc::LevelOutOfRange: return "LevelOutOfRange";
        case Errc::RedundantTransition: return "RedundantTransition";
        case Errc::AlphaBelowOne: return "AlphaBelowOne";
        case Errc::EmptyInterval: return "EmptyInterval";
        case Errc::UnsortedGrid: return "UnsortedGrid";
        case Errc::NegativeDt: return "NegativeDt";
        case Errc::EventSkipped: return "EventSkipped";
        case Errc::NotInContact: return "NotInContact";
        case Errc::WrongDirection: return "WrongDirection";
        case Errc::NegativeOffset: return "NegativeOffset";
        case Errc::CouplingNotComplete: return "CouplingNotComplete";
        case Errc::InadmissibleState: return "InadmissibleState";
        case Errc::StalledSimulation: return "StalledSimulation";
        case Errc::IncompatibleData: return "IncompatibleData";
        case Errc::NonPositiveK: return "NonPositiveK";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::InvalidRadii: return "InvalidRadii";
        case Errc::QuadratureNotConverged: return "QuadratureNotConverged";
    }
    return "UnknownError";
}

} // namespace mlcpgd
