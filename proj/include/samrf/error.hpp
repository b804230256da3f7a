#pragma once

#include <stdexcept>
#include <string>

namespace samrf {

// Thrown on any validation or ingestion failure. Messages are prefixed
// with the operation that rejected the input.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace samrf
