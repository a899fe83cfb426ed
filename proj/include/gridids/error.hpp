#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridids {

enum class ErrorCode {
  MissingColumn,
  LabelParse,
  EmptyFile,
  AllMissingColumn,
  EmptyResult,
  ClassTooSmall,
  UnknownFeature,
  OutputNameCollision,
  NotEnoughNeighbors,
  DimensionMismatch,
  UnknownLabel,
  LengthMismatch,
  MissingSection,
  InvalidArgument,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 protected:
  struct Verbatim {};
  Error(ErrorCode code, const std::string& what, Verbatim) : std::runtime_error(what), code_(code) {}

 private:
  ErrorCode code_;
};

/// Error raised by the experiment runner; carries the name of the pipeline stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& inner)
      : Error(inner.code(), "[" + stage + "] " + inner.what(), Verbatim{}), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace gridids
