#include "toeplitz_hc/error.hpp"

namespace toeplitz_hc {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::LambdaInRange: return "LambdaInRange";
    case ErrorCode::AspectOverflow: return "AspectOverflow";
    case ErrorCode::ParamInvalid: return "ParamInvalid";
    case ErrorCode::PeelFailure: return "PeelFailure";
    case ErrorCode::ZeroOutsideDisk: return "ZeroOutsideDisk";
    case ErrorCode::TooCloseToCurve: return "TooCloseToCurve";
    case ErrorCode::PhaseUnresolved: return "PhaseUnresolved";
    case ErrorCode::MeshOverflow: return "MeshOverflow";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::LambdaNotInHole: return "LambdaNotInHole";
    case ErrorCode::CancellationFailure: return "CancellationFailure";
    case ErrorCode::PreimageSearchFailed: return "PreimageSearchFailed";
    case ErrorCode::MultiplePreimagesCollide: return "MultiplePreimagesCollide";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::SchemaError: return "SchemaError";
    }
    return "Unknown";
}

} // namespace toeplitz_hc
