#pragma once

#include <stdexcept>
#include <string>

namespace emosid {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

#define EMOSID_ERROR(Name)                                         \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string &what) : Error(#Name ": " + what) {} \
  }

// Frontend / prosody.
EMOSID_ERROR(EmptyAudio);
EMOSID_ERROR(AudioTooShort);
EMOSID_ERROR(NonPositiveEnergy);
EMOSID_ERROR(TooFewFrames);

// HMM engine.
EMOSID_ERROR(EmptyObservation);
EMOSID_ERROR(DimensionMismatch);
EMOSID_ERROR(InsufficientData);
EMOSID_ERROR(NumericalFailure);

// Pipeline / registry.
EMOSID_ERROR(MissingCell);
EMOSID_ERROR(UnknownLabel);
EMOSID_ERROR(AblationModelsMissing);

// Corpus / files.
EMOSID_ERROR(ParseError);
EMOSID_ERROR(InvariantViolation);
EMOSID_ERROR(UnsupportedFormat);
EMOSID_ERROR(IoError);

// Evaluation.
EMOSID_ERROR(EmptyEvaluation);
EMOSID_ERROR(UndefinedColumn);

#undef EMOSID_ERROR

}  // namespace emosid
