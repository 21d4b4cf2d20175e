#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toeplitz_hc {

enum class ErrorCode {
    PoleHit,
    DomainViolation,
    NonConvergence,
    LambdaInRange,
    AspectOverflow,
    ParamInvalid,
    PeelFailure,
    ZeroOutsideDisk,
    TooCloseToCurve,
    PhaseUnresolved,
    MeshOverflow,
    GridTooCoarse,
    LambdaNotInHole,
    CancellationFailure,
    PreimageSearchFailed,
    MultiplePreimagesCollide,
    Overflow,
    SchemaError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying one of the library's error codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

#define THC_FAIL_IF(cond, code, msg)                                                         \
    do {                                                                                     \
        if (cond) {                                                                          \
            throw ::toeplitz_hc::Error(::toeplitz_hc::ErrorCode::code, msg);                 \
        }                                                                                    \
    } while (false)

} // namespace toeplitz_hc
