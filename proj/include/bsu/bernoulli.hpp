#pragma once

#include <vector>

#include "bsu/int.hpp"

namespace bsu {

/// Bernoulli numbers B_0..B_n (B_1 = -1/2 convention), cached process-wide.
const std::vector<Rat>& bernoulli_numbers(size_t n);

/// Value of the k-th Bernoulli polynomial at a rational point, exact.
Rat bernoulli_poly(unsigned k, const Rat& x);

} // namespace bsu
