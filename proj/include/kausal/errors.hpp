#pragma once

#include <stdexcept>
#include <string>

namespace kausal {

// Base for every error the library throws deliberately. Programmer-contract
// violations (bad index arithmetic etc.) use the std exceptions instead.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct LengthMismatch : Error {
  using Error::Error;
};
struct MalformedFile : Error {
  using Error::Error;
};
struct MaskOutOfRange : Error {
  using Error::Error;
};
struct TooShort : Error {
  using Error::Error;
};
struct TooLarge : Error {
  using Error::Error;
};
struct BadBlockAlignment : Error {
  using Error::Error;
};
struct OrderInconsistent : Error {
  using Error::Error;
};
struct GateIndexOutOfRange : Error {
  using Error::Error;
};
struct GeneratorMismatch : Error {
  using Error::Error;
};
struct NoCoveringModel : Error {
  using Error::Error;
};
struct TooManyParties : Error {
  using Error::Error;
};
struct InconsistentRelation : Error {
  using Error::Error;
};
struct UnknownExperiment : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};
struct GoldenMismatch : Error {
  using Error::Error;
};

}  // namespace kausal
