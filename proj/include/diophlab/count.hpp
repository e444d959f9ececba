#pragma once

// Exact counting of the four-variable inequality
//
//   |phi1(m1) - phi1(m2) + phi2(m3) - phi2(m4)| <= delta * M^alpha,
//   (m1, m2, m3, m4) in (Z cap [M, 2M])^4,
//
// by an O(M^4) brute force (the oracle) and an O(M^2 log M) sorted counter,
// plus the analogous quadratic box count and the shifted convolution sum
// over r2.
//
// Shared-value protocol: both algorithms consume the same value arrays
//   v1[i] = phi1(M + i), v2[i] = phi2(M + i), i = 0..M,
// the same threshold tau = delta * pow(M, alpha) evaluated once, and compare
// |(v1[i] - v1[j]) + (v2[k] - v2[l])| <= tau with that exact association of
// operations. IEEE rounding is monotone in each addend, so the sorted counter
// reproduces the brute-force tie behavior bit for bit; "equal counts" in the
// tests means equal integers, not equal up to tolerance.

#include <cstdint>

#include "diophlab/forms.hpp"

namespace diophlab {

enum class CountMethod { bruteforce, sorted };

struct CountOutcome {
    std::uint64_t m = 0;        // box parameter M
    double delta = 0.0;
    std::uint64_t count = 0;
    CountMethod method = CountMethod::bruteforce;
    double threshold = 0.0;     // delta * M^alpha as evaluated
};

// O(M^4) reference count. Refuses M > 48 (the quadruple space passes 5.7e6
// at that point and the point of this routine is to stay obviously correct).
CountOutcome count_bruteforce(std::uint64_t M, double delta, const PhiPair& phi);

// Same count via sorted pair-difference arrays and a linear two-pointer scan.
CountOutcome count_sorted(std::uint64_t M, double delta, const PhiPair& phi);

// #{y in (Z cap [N, 2N])^4 : |y1^2 - y2^2 - alpha2 (y3^2 - y4^2)| <= beta},
// same sorted scheme. The evaluation protocol here is
//   a = sq[i] - sq[j] (exact integers in double), b = alpha2 * (sq[k] - sq[l]),
//   |a - b| <= beta.
std::uint64_t count_quadratic_box(std::uint64_t N, double beta_thresh, double alpha2);

// sum_{0 <= l <= L} sum_{1 <= m <= M} r2(m) r2(m + l).
std::uint64_t correlation_r2(std::uint64_t M, std::uint64_t L);

} // namespace diophlab
