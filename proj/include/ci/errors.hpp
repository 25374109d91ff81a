// errors.hpp -- exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace ci {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define CI_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                       \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

CI_DEFINE_ERROR(EmptyBasis);
CI_DEFINE_ERROR(BetaTooSmall);
CI_DEFINE_ERROR(BetaTooLarge);
CI_DEFINE_ERROR(StructureViolation);
CI_DEFINE_ERROR(DimensionMismatch);
CI_DEFINE_ERROR(FormatError);
CI_DEFINE_ERROR(AsymmetryError);
CI_DEFINE_ERROR(SpecMismatch);
CI_DEFINE_ERROR(SubspaceCollapse);
CI_DEFINE_ERROR(IndefiniteGram);
CI_DEFINE_ERROR(SingularShift);
CI_DEFINE_ERROR(EvenGridOrder);
CI_DEFINE_ERROR(ConfigError);

#undef CI_DEFINE_ERROR

}  // namespace ci
