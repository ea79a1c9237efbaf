#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lipstab/document.hpp"

namespace lipstab {

/// Rows (-1)^t t x1 <= 1 for t = 1..N ("t=1".."t=N") and x1 + x2 <= 0
/// ("t=0"), a finite truncation of a countable system whose modulus at the
/// origin is 1 while every truncation has 1/sqrt(2).
SystemDocument demo_paper_example(int n_rows);

/// x^2 <= p: the strong Slater condition fails at p = 0.
SystemDocument demo_convex_square();

/// x^2 - 1 <= p.
SystemDocument demo_convex_square_shifted();

/// Gaussian rows with right-hand sides in [-0.5, 1.5), redrawn until the
/// strong Slater condition holds. Throws RetryExhausted after `max_retries`.
SystemDocument demo_random(int n, int m, std::uint64_t seed, int max_retries = 100);

std::vector<std::string> demo_names();

}  // namespace lipstab
