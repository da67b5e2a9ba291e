#pragma once

#include <stdexcept>
#include <string>

namespace ellipdiff {

enum class Errc {
  DegenerateBasis,
  PoleAtLatticePoint,
  NotLatticeVector,
  ZeroSeries,
  SingularMatrix,
  DimensionMismatch,
  PoleHit,
  DenominatorZero,
  DenominatorIdenticallyZero,
  HigherOrderPole,
  NotElliptic,
  NonCoprime,
  NotInvertible,
  MismatchedParameters,
  SingularGauge,
  ZeroTwist,
  Resonant,
  NotRegularSingular,
  B0NotConstant,
  SingularInput,
  InvalidBlockShape,
  NonCommuting,
  NotLegitimate,
  InvalidInput,
  PoleOnOrbit,
  BudgetExceeded,
  HypothesisViolated,
  NotSatisfied,
  Obstructed,
  Schema,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised when an eigenvalue ratio equals p^i; carries the offending i.
class ResonantError : public Error {
 public:
  ResonantError(int exponent, const std::string& what)
      : Error(Errc::Resonant, what), exponent_(exponent) {}
  int exponent() const noexcept { return exponent_; }

 private:
  int exponent_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace ellipdiff
