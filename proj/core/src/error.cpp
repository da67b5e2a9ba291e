#include "ellipdiff/error.hpp"

namespace ellipdiff {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DegenerateBasis: return "DegenerateBasis";
    case Errc::PoleAtLatticePoint: return "PoleAtLatticePoint";
    case Errc::NotLatticeVector: return "NotLatticeVector";
    case Errc::ZeroSeries: return "ZeroSeries";
    case Errc::SingularMatrix: return "SingularMatrix";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::PoleHit: return "PoleHit";
    case Errc::DenominatorZero: return "DenominatorZero";
    case Errc::DenominatorIdenticallyZero: return "DenominatorIdenticallyZero";
    case Errc::HigherOrderPole: return "HigherOrderPole";
    case Errc::NotElliptic: return "NotElliptic";
    case Errc::NonCoprime: return "NonCoprime";
    case Errc::NotInvertible: return "NotInvertible";
    case Errc::MismatchedParameters: return "MismatchedParameters";
    case Errc::SingularGauge: return "SingularGauge";
    case Errc::ZeroTwist: return "ZeroTwist";
    case Errc::Resonant: return "Resonant";
    case Errc::NotRegularSingular: return "NotRegularSingular";
    case Errc::B0NotConstant: return "B0NotConstant";
    case Errc::SingularInput: return "SingularInput";
    case Errc::InvalidBlockShape: return "InvalidBlockShape";
    case Errc::NonCommuting: return "NonCommuting";
    case Errc::NotLegitimate: return "NotLegitimate";
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::PoleOnOrbit: return "PoleOnOrbit";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::HypothesisViolated: return "HypothesisViolated";
    case Errc::NotSatisfied: return "NotSatisfied";
    case Errc::Obstructed: return "Obstructed";
    case Errc::Schema: return "Schema";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ellipdiff
