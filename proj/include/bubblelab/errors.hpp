/// @file errors.hpp
/// @brief Exception types raised by the library. Each maps to one named failure mode.
#pragma once

#include <stdexcept>
#include <string>

namespace bubblelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector fell inside the tubular-neighbourhood guard of the sphere.
class BelowGuard : public Error {
 public:
  explicit BelowGuard(double norm)
      : Error("vector norm " + std::to_string(norm) + " below projection guard"), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

class NotTangential : public Error {
 public:
  using Error::Error;
};

class AtSingularity : public Error {
 public:
  using Error::Error;
};

class NonConvergent : public Error {
 public:
  using Error::Error;
};

class EnergyIncreased : public Error {
 public:
  EnergyIncreased(double before, double after)
      : Error("energy increased from " + std::to_string(before) + " to " + std::to_string(after)),
        before_(before),
        after_(after) {}
  double before() const { return before_; }
  double after() const { return after_; }

 private:
  double before_;
  double after_;
};

class NoBubble : public Error {
 public:
  using Error::Error;
};

/// Concentration radius fell below three grid cells.
class Unresolved : public Error {
 public:
  Unresolved(double radius, double a1, double a2)
      : Error("bubble radius " + std::to_string(radius) + " below grid resolution"),
        radius_(radius),
        a1_(a1),
        a2_(a2) {}
  double radius() const { return radius_; }
  double a1() const { return a1_; }
  double a2() const { return a2_; }

 private:
  double radius_;
  double a1_;
  double a2_;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace bubblelab
