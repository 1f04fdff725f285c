#pragma once

#include <stdexcept>
#include <string>

namespace margin_guard {

// Raised when a consistency polytope has no strictly interior point.
class InfeasiblePolytopeError : public std::runtime_error {
 public:
  explicit InfeasiblePolytopeError(const std::string& what)
      : std::runtime_error(what) {}
};

// Base for failures of the stochastic machinery (walks, rejection samplers).
class SamplerError : public std::runtime_error {
 public:
  explicit SamplerError(const std::string& what) : std::runtime_error(what) {}
};

// Chord length collapsed below resolution for too many consecutive steps.
class StuckWalkError : public SamplerError {
 public:
  explicit StuckWalkError(const std::string& what) : SamplerError(what) {}
};

// Gradient-descent training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace margin_guard
