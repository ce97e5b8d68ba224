#pragma once

#include <stdexcept>
#include <string>

namespace dsproj {

// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A Newton system matrix was detected as (numerically) singular.
struct JacobianSingular : Error {
  explicit JacobianSingular(const std::string& what) : Error(what) {}
};

// A shift selection touched a positive entry it must not touch.
struct InvalidSelection : Error {
  explicit InvalidSelection(const std::string& what) : Error(what) {}
};

// No finite admissible shift endpoint exists for the chosen selection.
struct NoFiniteShift : Error {
  explicit NoFiniteShift(const std::string& what) : Error(what) {}
};

// The solver revisited an iterate after a reseed; aborting instead of looping.
struct CyclingSuspected : Error {
  explicit CyclingSuspected(const std::string& what) : Error(what) {}
};

// A requested block decomposition produced a non-square block.
struct NonSquareBlock : Error {
  explicit NonSquareBlock(const std::string& what) : Error(what) {}
};

// The instance exceeds a hard size limit of the requested operation.
struct InstanceTooLarge : Error {
  explicit InstanceTooLarge(const std::string& what) : Error(what) {}
};

// A matrix file could not be parsed.
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

// An input matrix is not square.
struct NonSquare : Error {
  explicit NonSquare(const std::string& what) : Error(what) {}
};

}  // namespace dsproj
