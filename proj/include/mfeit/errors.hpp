#pragma once

#include <stdexcept>
#include <string>

namespace mfeit {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad input: malformed configuration, out-of-class shapes, bad resolutions.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// A numerical procedure could not produce a trustworthy answer.
class NumericError : public Error {
  public:
    using Error::Error;
};

class ConstraintViolation : public ValidationError {
  public:
    ConstraintViolation(std::string bound, double worst_theta, double value);

    const std::string& bound() const noexcept { return bound_; }
    double worst_theta() const noexcept { return worst_theta_; }
    double value() const noexcept { return value_; }

  private:
    std::string bound_;
    double worst_theta_;
    double value_;
};

class InvalidResolution : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class ResolutionTooLow : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class DomainViolation : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class SingularEvaluation : public NumericError {
  public:
    using NumericError::NumericError;
};

class TargetTooClose : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class NotConverged : public NumericError {
  public:
    using NumericError::NumericError;
};

class SingularSystem : public NumericError {
  public:
    using NumericError::NumericError;
};

/// The contrast sits on (or numerically next to) a plasmonic resonance.
class NearResonance : public NumericError {
  public:
    NearResonance(const std::string& what, int frequency_index = -1)
        : NumericError(what), frequency_index_(frequency_index) {}
    int frequency_index() const noexcept { return frequency_index_; }

  private:
    int frequency_index_;
};

class InsufficientFrequencies : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class FitDiverged : public NumericError {
  public:
    using NumericError::NumericError;
};

class NonRealLimit : public NumericError {
  public:
    using NumericError::NumericError;
};

class ContourCrossesPole : public NumericError {
  public:
    using NumericError::NumericError;
};

class Diverged : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace mfeit
