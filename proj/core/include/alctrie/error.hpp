#pragma once

#include <stdexcept>

namespace alctrie {

/// Base class for every runtime error raised by the library. Precondition
/// violations on numeric arguments use std::invalid_argument or
/// std::domain_error instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace alctrie
