#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed parameters outside an operation's domain (odd n where even is
// required, malformed bitstrings, ambiguous targets, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A size guard tripped (tree depth, dense dimension, bit count).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// An energy sits on a resonance of a bush, so a ratio or transfer matrix is
// undefined there.
class PoleError : public Error {
 public:
  PoleError(double energy, double resonance, const std::string& what)
      : Error(what), energy_(energy), resonance_(resonance) {}

  double energy() const { return energy_; }
  double resonance() const { return resonance_; }

 private:
  double energy_;
  double resonance_;
};

// An internal contract was broken: non-restricted instance handed to C0,
// locality budget exceeded, divergent quadrature, etc.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace qwalk
