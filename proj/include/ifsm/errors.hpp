#pragma once

#include <stdexcept>
#include <string>

namespace ifsm {

/// Two paths with different grid cell counts were combined.
struct GridMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A map inverse landed off the sampling grid (grid too coarse or map
/// endpoints not dyadic).
struct MisalignmentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An operation that needs a contraction got a system with factor >= 1.
struct NotContractiveError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Maps overlap where a nonoverlapping family is required.
struct OverlapError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace ifsm
