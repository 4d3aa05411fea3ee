#pragma once

#include <stdexcept>
#include <string>

namespace eilscond {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// The problem violates rank(B) = s or positive definiteness of A^T J A on N(B),
/// or a factorization that the closed forms rely on is singular.
class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

/// An explicit Kronecker-form matrix would exceed the configured entry cap.
class MemoryGuardRefused : public Error {
 public:
  MemoryGuardRefused(const std::string& what, double entries, double cap)
      : Error(what), entries_(entries), cap_(cap) {}
  double entries() const { return entries_; }
  double cap() const { return cap_; }

 private:
  double entries_;
  double cap_;
};

/// x = 0, so the projector I - x x^T / |x|^2 is undefined.
class ZeroSolution : public Error {
 public:
  using Error::Error;
};

/// L^T x = 0, so the mixed condition number is undefined.
class DegenerateProjection : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eilscond
