#pragma once

#include <stdexcept>
#include <string>

namespace tropbbs {

// Domain error with a stable machine-readable code. The CLI prints the code
// verbatim; tests match on it.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace err {
inline constexpr const char* SizeMismatch = "SizeMismatch";
inline constexpr const char* NegativeCycle = "NegativeCycle";
inline constexpr const char* Acyclic = "Acyclic";
inline constexpr const char* EigenvectorUndefined = "EigenvectorUndefined";
inline constexpr const char* LevelTooHigh = "LevelTooHigh";
inline constexpr const char* InconsistentFixedPoint = "InconsistentFixedPoint";
inline constexpr const char* NonIntegerState = "NonIntegerState";
inline constexpr const char* CancellationDetected = "CancellationDetected";
inline constexpr const char* DegenerateSupport = "DegenerateSupport";
inline constexpr const char* PointNotOnCurve = "PointNotOnCurve";
inline constexpr const char* DisconnectedPoints = "DisconnectedPoints";
inline constexpr const char* SingularPeriodMatrix = "SingularPeriodMatrix";
inline constexpr const char* NotFound = "NotFound";
inline constexpr const char* ParseError = "ParseError";
inline constexpr const char* InvariantViolation = "InvariantViolation";
inline constexpr const char* AequalsB = "AequalsB";
inline constexpr const char* NonConvergence = "NonConvergence";
inline constexpr const char* NonPositiveMatrix = "NonPositiveMatrix";
inline constexpr const char* NonPositiveSample = "NonPositiveSample";
inline constexpr const char* Internal = "Internal";
} // namespace err

} // namespace tropbbs
