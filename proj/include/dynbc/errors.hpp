#pragma once

#include <stdexcept>
#include <string>

namespace dynbc {

/// Base of every error raised by the library. The name() is stable and is
/// what the CLI writes into machine-readable error records.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define DYNBC_DEFINE_ERROR(Type)                                   \
  class Type : public Error {                                      \
   public:                                                         \
    explicit Type(const std::string& what) : Error(#Type, what) {} \
  }

DYNBC_DEFINE_ERROR(PoleError);
DYNBC_DEFINE_ERROR(DirichletPointError);
DYNBC_DEFINE_ERROR(BracketError);
DYNBC_DEFINE_ERROR(DegenerateModeError);
DYNBC_DEFINE_ERROR(ResonanceError);
DYNBC_DEFINE_ERROR(ShapeError);
DYNBC_DEFINE_ERROR(DomainError);
DYNBC_DEFINE_ERROR(TruncationError);
DYNBC_DEFINE_ERROR(ConstraintError);
DYNBC_DEFINE_ERROR(ConvergenceError);
DYNBC_DEFINE_ERROR(NonUniqueArgminError);
DYNBC_DEFINE_ERROR(ConfigError);

#undef DYNBC_DEFINE_ERROR

}  // namespace dynbc
