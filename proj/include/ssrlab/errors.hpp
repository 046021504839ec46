#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssrlab {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid construction arguments, violated preconditions, malformed input.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A party touched a mode it does not own.
class OwnershipError : public Error {
 public:
  OwnershipError(const std::string& msg, std::size_t step)
      : Error(msg), step_index(step) {}
  std::size_t step_index;
};

// Measurement attempted on a non-free mode.
class MeasurementError : public Error {
 public:
  MeasurementError(const std::string& msg, std::size_t step)
      : Error(msg), step_index(step) {}
  std::size_t step_index;
};

// Witness for a charge-superselection violation: a matrix entry connecting
// two subset-basis configurations with different restricted charge.
struct LegalityWitness {
  std::vector<int> source;      // config c (operator input)
  std::vector<int> target;      // config c' (operator output)
  std::complex<double> entry;   // <c'|U|c>
  int source_charge = 0;
  int target_charge = 0;
};

class LegalityError : public Error {
 public:
  LegalityError(const std::string& msg, LegalityWitness w,
                std::size_t step = 0)
      : Error(msg), witness(std::move(w)), step_index(step) {}
  LegalityWitness witness;
  std::size_t step_index;
};

// Broken internal invariant (norm drift, sector-weight leakage, ...).
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& msg) : Error(msg) {}
};

}  // namespace ssrlab
