#pragma once

#include <stdexcept>
#include <string>

namespace ftoda {

/// Base of every error raised by the library. The tag is the stable,
/// machine-readable name used in reports.
class Error : public std::runtime_error {
 public:
  Error(std::string tag, const std::string& what)
      : std::runtime_error(what), tag_(std::move(tag)) {}

  const std::string& tag() const noexcept { return tag_; }

 private:
  std::string tag_;
};

#define FTODA_DEFINE_ERROR(Name)                                         \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(#Name, what) {}       \
  };

FTODA_DEFINE_ERROR(DimensionMismatch)
FTODA_DEFINE_ERROR(NonFiniteValue)
FTODA_DEFINE_ERROR(InvalidArgument)
FTODA_DEFINE_ERROR(ZeroFunction)
FTODA_DEFINE_ERROR(AlreadyFull)
FTODA_DEFINE_ERROR(SingularFrame)
FTODA_DEFINE_ERROR(NotConstantRank)
FTODA_DEFINE_ERROR(SingularBeta)
FTODA_DEFINE_ERROR(IndexOutOfRange)
FTODA_DEFINE_ERROR(IntegrationDiverged)

#undef FTODA_DEFINE_ERROR

/// Raised when a leading block minor is singular or too ill-conditioned;
/// `block()` is the index of the failing diagonal block.
class GaussDecompositionFailed : public Error {
 public:
  GaussDecompositionFailed(int block, const std::string& what)
      : Error("GaussDecompositionFailed", what), block_(block) {}

  int block() const noexcept { return block_; }

 private:
  int block_;
};

/// Configuration problems carry the JSON path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error("ConfigError", path + ": " + what), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace ftoda
