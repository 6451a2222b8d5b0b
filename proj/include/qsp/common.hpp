#pragma once

#include <stdexcept>
#include <string>

namespace qsp {

// Error categories; the CLI maps them onto its exit codes
// (1 config, 2 numerical guard, 3 I/O).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsp
