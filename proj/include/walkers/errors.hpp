#pragma once

#include <stdexcept>
#include <string>

namespace walkers {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgumentError : Error {
  using Error::Error;
};

struct InvalidInputError : Error {
  using Error::Error;
};

struct OutOfBoundsError : InvalidArgumentError {
  using InvalidArgumentError::InvalidArgumentError;
};

/// Calling an operation whose preconditions the caller already violated
/// (e.g. advancing a dead tracker).
struct ContractViolationError : Error {
  using Error::Error;
};

// --- I/O ---

struct IoError : Error {
  using Error::Error;
};

struct FileMissingError : IoError {
  using IoError::IoError;
};

struct UnsupportedPngError : IoError {
  using IoError::IoError;
};

struct MalformedPngError : IoError {
  using IoError::IoError;
};

// --- weight file format ---

struct WeightsFormatError : IoError {
  using IoError::IoError;
};

struct BadMagicError : WeightsFormatError {
  using WeightsFormatError::WeightsFormatError;
};

struct VersionMismatchError : WeightsFormatError {
  using WeightsFormatError::WeightsFormatError;
};

struct TruncatedPayloadError : WeightsFormatError {
  using WeightsFormatError::WeightsFormatError;
};

struct InvalidWeightsError : Error {
  using Error::Error;
};

// --- pipeline outcomes that are errors ---

struct NoSeedsError : Error {
  using Error::Error;
};

struct EmptyRefinedMapError : Error {
  using Error::Error;
};

/// Candidate list exhausted without a closed contour: the open-shape outcome.
struct NoClosedContourError : Error {
  using Error::Error;
};

struct NotClosedError : Error {
  using Error::Error;
};

struct InvalidSpecError : Error {
  using Error::Error;
};

}  // namespace walkers
