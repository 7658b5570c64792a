#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace photogeo {

enum class ErrorCode {
    InvalidArgument,
    InvalidFov,
    InvalidSize,
    OutOfBounds,
    NonpositiveDepth,
    DegenerateSurface,
    BehindCamera,
    ShapeMismatch,
    EmptyMesh,
    AllBehindCamera,
    EmptyMask,
    EmptyCoverage,
    TooSmall,
    NonPsdCovariance,
    MissingFile,
    DecodeFailure,
    IoFailure,
    EmptySet,
    Divergence,
    Config,
    UnknownScene,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure surfaced by photogeo carries a code so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace photogeo
