#pragma once

#include <stdexcept>

namespace gwlab {

// Resource limit hit (vertex arena, step budget, trial cap). Maps to CLI exit 3.
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A confirmed regeneration was invalidated by a later step. The confirmation
// margin makes this a <= beta^-margin event per confirmation; it is asserted
// to never fire in practice, and surfaced loudly when it does.
class soundness_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gwlab
