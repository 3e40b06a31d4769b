#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace simopt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSolutionError : public Error {
 public:
  using Error::Error;
};

class EmptyNeighborhoodError : public Error {
 public:
  using Error::Error;
};

/// Bad solver, space or experiment configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A ranking problem with a single candidate; the caller returns it as is.
class TrivialProblemError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// An objective failed to produce a value (CLI exit code 3 for workers).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class WorkerError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

class OutOfRangeError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

class BudgetExceededError : public Error {
 public:
  using Error::Error;
};

class DegenerateSplitError : public Error {
 public:
  using Error::Error;
};

/// A solver stopped because its objective failed; `cause` is the original error.
class AbortedRun : public EvaluationError {
 public:
  AbortedRun(const std::string& what, std::exception_ptr cause) : EvaluationError(what), cause_(std::move(cause)) {}
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::exception_ptr cause_;
};

/// AbortedRun carrying the solver's partial result.
template <typename Partial>
class SolverAborted : public AbortedRun {
 public:
  SolverAborted(const std::string& what, Partial partial, std::exception_ptr cause)
      : AbortedRun(what, std::move(cause)), partial_(std::move(partial)) {}
  const Partial& partial() const noexcept { return partial_; }

 private:
  Partial partial_;
};

}  // namespace simopt
