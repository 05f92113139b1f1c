#pragma once

#include <stdexcept>

namespace bmc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scalar parameter outside its admissible range (alpha, offspring b, ...).
struct DomainError : Error {
  using Error::Error;
};

// Chain construction and validation.
struct InvalidChain : Error {
  using Error::Error;
};
struct RowSumError : InvalidChain {
  using InvalidChain::InvalidChain;
};
struct NegativeEntry : InvalidChain {
  using InvalidChain::InvalidChain;
};
struct NotIrreducible : InvalidChain {
  using InvalidChain::InvalidChain;
};
struct InvalidState : Error {
  using Error::Error;
};

// Series computation.
struct BudgetExceeded : Error {
  using Error::Error;
};
struct NegativeFirstReturn : Error {
  using Error::Error;
};
struct InsufficientData : Error {
  using Error::Error;
};
struct DegenerateFit : Error {
  using Error::Error;
};

// Critical-parameter solving.
struct NotSupercritical : Error {
  using Error::Error;
};
struct BracketFailure : Error {
  using Error::Error;
};

}  // namespace bmc
