#ifndef OODKIT_ERROR_HPP
#define OODKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace oodkit {

// Bad input: shapes, values, file contents, missing requirements.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-convergence and the like.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace oodkit

#endif
