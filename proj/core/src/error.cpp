#include "nlagg/error.hpp"

namespace nlagg {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonZeroMean: return "NonZeroMean";
    case ErrorKind::SolverDivergence: return "SolverDivergence";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::KernelTooWide: return "KernelTooWide";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::ZeroInput: return "ZeroInput";
    case ErrorKind::MissingKey: return "MissingKey";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::CorruptHeader: return "CorruptHeader";
    case ErrorKind::SizeMismatch: return "SizeMismatch";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace nlagg
