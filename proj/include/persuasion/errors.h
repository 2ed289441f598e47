#pragma once

#include <stdexcept>
#include <string>

namespace persuasion {

// Input does not describe a valid problem (bad file, broken invariant, or an
// LP that turned out infeasible because of it).
class InvalidInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A size cap was exceeded (exhaustive paths, subset tables, expansions).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The numerical machinery failed on input that should have been solvable.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace persuasion
