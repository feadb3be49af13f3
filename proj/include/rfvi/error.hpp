#pragma once

#include <stdexcept>
#include <string>

namespace rfvi {

/// Base of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or violated preconditions.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be used (malformed file, single-class labels, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace rfvi
