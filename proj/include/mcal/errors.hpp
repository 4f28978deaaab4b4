#pragma once

#include <stdexcept>
#include <string>

namespace mcal {

enum class ErrorKind {
  NonRectangular,
  RowSumZero,
  OutOfRange,
  KOutOfRange,
  EmptyInput,
  BinsExceedPoints,
  ClassCountMismatch,
  InvalidHyperparameters,
  NotOnSimplex,
  NoBinFound,
  TooFewPoints,
  NonUnitDirection,
  UnsupportedPredictor,
  NonFinite,
  MalformedHeader,
  LabelOutOfRange,
  RaggedRow,
  SchemaViolation,
  VersionMismatch,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mcal
