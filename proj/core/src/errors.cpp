#include "s2gpt/errors.hpp"

namespace s2gpt {

void throw_consistency(const std::string& what) {
  throw ConsistencyError("s2gpt internal consistency: " + what);
}

}  // namespace s2gpt
