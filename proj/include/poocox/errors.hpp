#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace poocox {

/// Input that cannot be turned into a valid pedigree or configuration.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed PED content. Carries the family and line the problem was found on.
class ParseError : public ValidationError {
 public:
  ParseError(std::string family_id, std::size_t line, std::string reason)
      : ValidationError(format(family_id, line, reason)),
        family_id_(std::move(family_id)),
        line_(line),
        reason_(std::move(reason)) {}

  const std::string& family_id() const noexcept { return family_id_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  static std::string format(const std::string& fam, std::size_t line, const std::string& reason) {
    std::string out = "line " + std::to_string(line);
    if (!fam.empty()) out += " (family " + fam + ")";
    return out + ": " + reason;
  }

  std::string family_id_;
  std::size_t line_;
  std::string reason_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base for failures of the numerical machinery (inference, Cox fit, EM).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The evidence has probability zero under the model.
class ImpossibleEvidence : public NumericalError {
 public:
  explicit ImpossibleEvidence(std::string family_id)
      : NumericalError("evidence has zero probability in family " + family_id),
        family_id_(std::move(family_id)) {}
  const std::string& family_id() const noexcept { return family_id_; }

 private:
  std::string family_id_;
};

/// Brute-force enumeration refused because the family is too large.
class CapExceeded : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class RankDeficiency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularInformation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MonotoneLikelihood : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An M-step failure annotated with the EM iteration it happened in.
class EMStepError : public NumericalError {
 public:
  EMStepError(int iteration, const std::string& what)
      : NumericalError("M-step failed at EM iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace poocox
