#pragma once

#include <stdexcept>
#include <string>

namespace hsearch {

// Base of every error raised by the library. `code()` is a stable
// identifier (e.g. "FileNotFound") that the CLI prints and tests match on.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define HSEARCH_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// corpus
HSEARCH_DEFINE_ERROR(FileNotFound);
HSEARCH_DEFINE_ERROR(AllRecordsInvalid);
HSEARCH_DEFINE_ERROR(EmptyVocabulary);

// topics
HSEARCH_DEFINE_ERROR(TooFewDocuments);
HSEARCH_DEFINE_ERROR(UnknownItem);
HSEARCH_DEFINE_ERROR(EmptyProfile);
HSEARCH_DEFINE_ERROR(InvalidConfig);

// wordgraph
HSEARCH_DEFINE_ERROR(ParseError);
HSEARCH_DEFINE_ERROR(NonConvergence);
HSEARCH_DEFINE_ERROR(SingularSystem);

// cocluster
HSEARCH_DEFINE_ERROR(InfeasibleConfig);

// ranking
HSEARCH_DEFINE_ERROR(EmptyCluster);

// metrics
HSEARCH_DEFINE_ERROR(DuplicateElements);
HSEARCH_DEFINE_ERROR(ZeroVariance);
HSEARCH_DEFINE_ERROR(EmptyList);
HSEARCH_DEFINE_ERROR(DomainMismatch);

#undef HSEARCH_DEFINE_ERROR

// Raised by the pipeline; wraps whatever a stage threw and names the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "[" + stage + "] " + cause.code() + ": " + cause.what()),
        stage_(std::move(stage)) {}
  StageError(std::string stage, const std::string& code, const std::string& message)
      : Error(code, "[" + stage + "] " + code + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace hsearch
