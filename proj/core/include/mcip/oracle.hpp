#pragma once

#include "mcip/fo.hpp"

namespace mcip::oracle {

/// Brute-force model checker: plain depth-first recursion over the prefix,
/// n^k leaf evaluations worst case. Deliberately unclever -- this is the
/// ground truth everything else is validated against.
bool model_check(const fo::Instance& inst);

} // namespace mcip::oracle
