#pragma once

#include <stdexcept>
#include <string>

namespace cwdabc {

/// Requested a process/model combination that does not exist
/// (e.g. a CTMC over the environmental-mass compartment).
class UnsupportedModelError : public std::runtime_error {
 public:
  explicit UnsupportedModelError(const std::string& what)
      : std::runtime_error(what) {}
};

/// Matrix handed to psd_sqrt had an eigenvalue below the PSD floor.
class NotPsdError : public std::runtime_error {
 public:
  NotPsdError(const std::string& what, double eigenvalue)
      : std::runtime_error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// A simulator produced a non-finite state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// A single particle slot exhausted its attempt budget: the tolerance
/// schedule is too tight for the model menu and data at hand.
class ScheduleTooTightError : public std::runtime_error {
 public:
  ScheduleTooTightError(const std::string& what, int generation,
                        double acceptance_rate)
      : std::runtime_error(what),
        generation_(generation),
        acceptance_rate_(acceptance_rate) {}
  int generation() const { return generation_; }
  double acceptance_rate() const { return acceptance_rate_; }

 private:
  int generation_;
  double acceptance_rate_;
};

/// Bad input file or config: message carries the offending rows/keys.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace cwdabc
