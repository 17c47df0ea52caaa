#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mevgen {

// Argument outside the mathematical domain of an operation (x <= 0, u not in (0,1], ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Vector or matrix dimensions that do not agree with the model.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A ModelSpec or tail-dependence matrix failed its invariants.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "validation failed";
    for (const auto& s : v) {
      out += "; ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

// Requested scale constant is below the smallest feasible value.
class InfeasibleError : public std::invalid_argument {
public:
  InfeasibleError(double requested, double c_min)
      : std::invalid_argument("C = " + std::to_string(requested) +
                              " is infeasible; c_min = " + std::to_string(c_min)),
        requested_(requested), c_min_(c_min) {}

  double requested() const noexcept { return requested_; }
  double c_min() const noexcept { return c_min_; }

private:
  double requested_;
  double c_min_;
};

// Sample batch was not generated by the model it is being compared against.
class ProvenanceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON, CSV).
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace mevgen
