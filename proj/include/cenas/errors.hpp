#pragma once

#include <stdexcept>
#include <string>

namespace cenas {

// Precondition or invariant broken by the caller.
struct contract_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Lookup of an id that is not present.
struct not_found_error : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Malformed or invalid input file. The message names the row/column.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No unobserved architecture is left to sample.
struct search_exhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cenas
