/******************************************************************************
 * @file admission/error.hpp
 *
 * @brief Exception types thrown by the planner. Every error carries enough
 *        context (element id, step index, label) to be reported verbatim.
 ******************************************************************************/

#ifndef ADMISSION_ERROR_HPP_
#define ADMISSION_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace admission {

class Error : public std::runtime_error {
 public:
   using std::runtime_error::runtime_error;
};

//! Malformed GraphML or chain-spec input.
class ParseError : public Error {
 public:
   using Error::Error;
};

//! Structural problem in an otherwise parseable graph.
class InvalidDag : public Error {
 public:
   using Error::Error;
};

class CycleDetected : public InvalidDag {
 public:
   using InvalidDag::InvalidDag;
};

class DanglingVertex : public InvalidDag {
 public:
   using InvalidDag::InvalidDag;
};

class NotEliminatable : public Error {
 public:
   using Error::Error;
};

class NoSuchEdge : public Error {
 public:
   using Error::Error;
};

class AlreadyAccumulated : public Error {
 public:
   using Error::Error;
};

class NotElemental : public Error {
 public:
   using Error::Error;
};

class StepInapplicable : public Error {
 public:
   StepInapplicable(std::size_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), m_step(step) {}

   [[nodiscard]] auto step() const -> std::size_t {
      return m_step;
   }

 private:
   std::size_t m_step;
};

class CostMismatch : public Error {
 public:
   CostMismatch(std::size_t step, const std::string& what)
        : Error("step " + std::to_string(step) + ": " + what), m_step(step) {}

   [[nodiscard]] auto step() const -> std::size_t {
      return m_step;
   }

 private:
   std::size_t m_step;
};

class IncompletePlan : public Error {
 public:
   using Error::Error;
};

class ChainTooLong : public Error {
 public:
   using Error::Error;
};

//! Unreadable or malformed session configuration.
class ConfigError : public Error {
 public:
   using Error::Error;
};

class UnknownMethod : public Error {
 public:
   using Error::Error;
};

}  // namespace admission

#endif  // ADMISSION_ERROR_HPP_
