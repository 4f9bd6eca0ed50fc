#pragma once

// Exhaustive FLO solver for small instances: every outlier subset of size ell
// combined with every non-empty exemplar subset of the remaining points.
// Cost grows like C(n, ell) * 2^(n - ell), hence the size limit.

#include <stdexcept>

#include "flo/core.hpp"

namespace flo::exact {

class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

struct Limits {
    Index max_n = 14;
};

/// Global minimum-energy solution. Ties go to the lexicographically smallest
/// exemplar set, then the smallest outlier set.
Solution solve(const FloProblem& problem, const Limits& limits = {});

/// Number of feasible (exemplar set, outlier set) pairs on n points.
std::uint64_t count_feasible(Index n, Index ell);

}  // namespace flo::exact
