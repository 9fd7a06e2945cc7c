#pragma once

#include <stdexcept>

namespace scsqkd {

// An input document could not be read or does not conform to its schema.
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A domain type violates one of its declared invariants.
struct invariant_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A dataset cannot support the requested derivation (e.g. zero effective windows).
struct degenerate_data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scsqkd
