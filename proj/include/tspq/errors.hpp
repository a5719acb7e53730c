#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tspq {

/// Coarse failure category; the CLI maps these to exit codes.
enum class ErrorKind { Config, Solve, Io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define TSPQ_DEFINE_ERROR(Name, Kind)                       \
    class Name : public Error {                             \
    public:                                                 \
        explicit Name(std::string msg)                      \
            : Error(ErrorKind::Kind, std::move(msg)) {}     \
    }

TSPQ_DEFINE_ERROR(ThresholdOrderViolation, Config);
TSPQ_DEFINE_ERROR(NonPositiveRate, Config);
TSPQ_DEFINE_ERROR(BadFraction, Config);
TSPQ_DEFINE_ERROR(InvalidConfig, Config);
TSPQ_DEFINE_ERROR(ParseError, Config);
TSPQ_DEFINE_ERROR(EmptyResult, Config);

TSPQ_DEFINE_ERROR(OutOfRangeOccupancy, Solve);
TSPQ_DEFINE_ERROR(InvalidState, Solve);
TSPQ_DEFINE_ERROR(DimensionMismatch, Solve);
TSPQ_DEFINE_ERROR(ReducibleChain, Solve);
TSPQ_DEFINE_ERROR(ZeroAcceptedFlow, Solve);
TSPQ_DEFINE_ERROR(ParamMismatch, Solve);
TSPQ_DEFINE_ERROR(NumericalFailure, Solve);

TSPQ_DEFINE_ERROR(IoError, Io);

#undef TSPQ_DEFINE_ERROR

} // namespace tspq
