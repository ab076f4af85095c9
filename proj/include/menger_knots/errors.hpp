#pragma once

#include <stdexcept>
#include <string>

namespace menger_knots {

// Argument outside an operation's precondition (bad dimension, bad depth, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Geometry outside the domain an operation is defined on.
class OutOfBoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Request refused because it would exceed a documented size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed knot or certificate text.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace menger_knots
