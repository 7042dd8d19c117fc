#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace semigeo {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed expression or document text; offset() is the byte position the
// parser was looking at when it gave up.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Arithmetic domain violation during evaluation (division by zero, log/sqrt
// of a negative argument, non-finite result).
class EvalError : public Error {
 public:
  using Error::Error;
};

// A document, field value, or precondition failed validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Singular or ill-conditioned matrix, non-finite state, iteration guard hit.
class NumericsError : public Error {
 public:
  using Error::Error;
};

// A chart construction (congruence, flow, Picard) could not be completed.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Transform inversion failed: point outside the chart image, Newton
// divergence, or an irregular grid cell.
class InversionError : public Error {
 public:
  using Error::Error;
};

// Non-convergence of the successive-iteration solver; carries the recorded
// sup-norm difference history.
class PicardError : public ConstructionError {
 public:
  PicardError(const std::string& what, std::vector<double> history)
      : ConstructionError(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

// Thrown by an ODE right-hand side to request a clean stop (the state left
// the admissible region). Deliberately not part of the Error hierarchy: it is
// a control-flow signal, and integrate() turns it into a truncated trajectory.
struct DomainExit final {};

}  // namespace semigeo
