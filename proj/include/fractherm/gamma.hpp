#pragma once

#include "fractherm/types.hpp"

namespace fractherm {

/// Euler gamma function for positive arguments.
///
/// Lanczos approximation (g = 7, 9 terms), accurate to better than 1e-13
/// relative error on [1e-3, 170]; arguments below 1/2 go through the
/// recurrence gamma(x) = gamma(x + 1) / x.
///
/// Throws std::domain_error for x <= 0 and std::overflow_error for x > 170.
[[nodiscard]] Real gamma_fn(Real x);

}  // namespace fractherm
