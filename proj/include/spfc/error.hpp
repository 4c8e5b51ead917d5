#pragma once

#include <stdexcept>
#include <string>

namespace spfc {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spfc
