#pragma once

#include <stdexcept>
#include <string>

namespace zenoreach {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-point iteration did not stabilize within its step budget.
class IterationBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NotSupPreserving : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

// Hausdorff distance between an empty and a non-empty set.
class EmptyMismatch : public Error {
 public:
  using Error::Error;
};

class StepTooLarge : public Error {
 public:
  using Error::Error;
};

class BadParams : public Error {
 public:
  using Error::Error;
};

class NoOracle : public Error {
 public:
  using Error::Error;
};

class NotRefining : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace zenoreach
