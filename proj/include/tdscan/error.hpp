#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tdscan {

enum class ErrorKind {
  IoError,
  SerializationError,
  RateLimited,
  AuthFailed,
  NotFound,
  MalformedPage,
  UnresolvedComment,
  InsufficientLexicon,
  EmptyVocabulary,
  SingleClassData,
  EmptyTrainingSet,
  DimensionMismatch,
  TooFewExamples,
  ZeroRow,
  DegenerateSimilarity,
  KTooLarge,
  MissingClusterData,
  SchemaMismatch,
  CorruptModel,
  LengthMismatch,
  ConstantVector,
  MissingYear,
  UndefinedCagr,
  InvalidArgument,
};

inline std::string_view kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::SerializationError: return "SerializationError";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::AuthFailed: return "AuthFailed";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::MalformedPage: return "MalformedPage";
    case ErrorKind::UnresolvedComment: return "UnresolvedComment";
    case ErrorKind::InsufficientLexicon: return "InsufficientLexicon";
    case ErrorKind::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorKind::SingleClassData: return "SingleClassData";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewExamples: return "TooFewExamples";
    case ErrorKind::ZeroRow: return "ZeroRow";
    case ErrorKind::DegenerateSimilarity: return "DegenerateSimilarity";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::MissingClusterData: return "MissingClusterData";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::CorruptModel: return "CorruptModel";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ConstantVector: return "ConstantVector";
    case ErrorKind::MissingYear: return "MissingYear";
    case ErrorKind::UndefinedCagr: return "UndefinedCagr";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

// Carries the server-requested backoff so callers can sleep before retrying.
class RateLimitedError : public Error {
 public:
  RateLimitedError(double retry_after_seconds, const std::string& message)
      : Error(ErrorKind::RateLimited, message), retry_after_(retry_after_seconds) {}

  double retry_after_seconds() const noexcept { return retry_after_; }

 private:
  double retry_after_;
};

}  // namespace tdscan
