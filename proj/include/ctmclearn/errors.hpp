#pragma once

#include <stdexcept>
#include <string>

namespace ctmclearn {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonSquare : Error { using Error::Error; };
struct InvariantViolation : Error { using Error::Error; };
struct NotConverged : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct DegenerateChain : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };
struct EigenFailure : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct NonPositiveRate : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct SupportOverlap : Error { using Error::Error; };
struct ZeroMass : Error { using Error::Error; };
struct ZeroProbabilityObserved : Error { using Error::Error; };
struct DiagonalRequest : Error { using Error::Error; };
struct StructuralZero : Error { using Error::Error; };
struct EngineFailure : Error { using Error::Error; };
struct NonFiniteGradient : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ZeroTruth : Error { using Error::Error; };

}  // namespace ctmclearn
