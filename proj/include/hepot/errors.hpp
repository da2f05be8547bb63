#pragma once

#include <stdexcept>
#include <string>

namespace hepot {

/// Base class of every error raised by the library. `kind()` is a stable
/// identifier used in the CLI's machine-readable error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define HEPOT_DEFINE_ERROR(Name)                                         \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name, what) {}   \
    };

HEPOT_DEFINE_ERROR(ParseError)
HEPOT_DEFINE_ERROR(ReferenceError)
HEPOT_DEFINE_ERROR(DuplicateTrialError)
HEPOT_DEFINE_ERROR(NonUniformRateError)
HEPOT_DEFINE_ERROR(ChannelMismatchError)
HEPOT_DEFINE_ERROR(IoError)
HEPOT_DEFINE_ERROR(ConfigError)
HEPOT_DEFINE_ERROR(EmptyWindowError)
HEPOT_DEFINE_ERROR(DomainError)
HEPOT_DEFINE_ERROR(StateError)
HEPOT_DEFINE_ERROR(NoCandidateError)
HEPOT_DEFINE_ERROR(SignalTooShortError)
HEPOT_DEFINE_ERROR(InsufficientDataError)
HEPOT_DEFINE_ERROR(JointCountError)
HEPOT_DEFINE_ERROR(SubjectMismatchError)
HEPOT_DEFINE_ERROR(AllMissingError)
HEPOT_DEFINE_ERROR(RankError)
HEPOT_DEFINE_ERROR(UnknownFeatureError)
HEPOT_DEFINE_ERROR(DegenerateLabelsError)
HEPOT_DEFINE_ERROR(DimensionError)
HEPOT_DEFINE_ERROR(ProtocolError)
HEPOT_DEFINE_ERROR(EmptyMatrixError)

#undef HEPOT_DEFINE_ERROR

}  // namespace hepot
