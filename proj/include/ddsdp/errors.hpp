#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ddsdp {

// Root of every failure the solver reports. Callers that only care about
// "something numerical went wrong" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(std::ptrdiff_t index)
      : Error("matrix is not positive definite (pivot " + std::to_string(index) + ")"),
        index_(index) {}
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

class BoundaryReached : public Error {
 public:
  explicit BoundaryReached(std::ptrdiff_t pair)
      : Error("block " + std::to_string(pair) + " left the cone interior"), pair_(pair) {}
  std::ptrdiff_t pair() const { return pair_; }

 private:
  std::ptrdiff_t pair_;
};

class OddOrder : public Error {
 public:
  explicit OddOrder(std::ptrdiff_t n)
      : Error("edge coloring requires an even order, got " + std::to_string(n)) {}
};

// Input errors raised while reading SDPA files.
class InputError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public InputError {
 public:
  SyntaxError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class InconsistentDimensions : public InputError {
 public:
  using InputError::InputError;
};

class IndexOutOfBlock : public InputError {
 public:
  using InputError::InputError;
};

class RankDeficientConstraints : public Error {
 public:
  explicit RankDeficientConstraints(std::ptrdiff_t index)
      : Error("constraint " + std::to_string(index) +
              " is linearly dependent on the preceding ones"),
        index_(index) {}
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

class TooManyConstraints : public Error {
 public:
  using Error::Error;
};

class SingularKkt : public Error {
 public:
  using Error::Error;
};

class MaxIterations : public Error {
 public:
  using Error::Error;
};

class Unbounded : public Error {
 public:
  using Error::Error;
};

class InfeasibleStart : public Error {
 public:
  using Error::Error;
};

class SubproblemFailure : public Error {
 public:
  SubproblemFailure(int phase, const std::string& what)
      : Error("phase " + std::to_string(phase) + ": " + what), phase_(phase) {}
  int phase() const { return phase_; }

 private:
  int phase_;
};

class PhaseBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class CenteringBudgetExceeded : public Error {
 public:
  explicit CenteringBudgetExceeded(long budget)
      : Error("centering phase exceeded its budget of " + std::to_string(budget) +
              " iterations"),
        budget_(budget) {}
  long budget() const { return budget_; }

 private:
  long budget_;
};

class NonPositiveT : public Error {
 public:
  NonPositiveT() : Error("central-path lower bound is not positive; no certificate") {}
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class NoInteriorPointFound : public Error {
 public:
  using Error::Error;
};

}  // namespace ddsdp
