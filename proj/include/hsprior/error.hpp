#pragma once

#include <stdexcept>
#include <string>

namespace hsprior {

// Precondition violations throw std::invalid_argument; the types below cover
// failures that depend on the data or on the numerics.

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SamplerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail
}  // namespace hsprior
