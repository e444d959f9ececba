#pragma once

// Minimum-value searches for the ternary forms over dyadic boxes, a decay
// exponent fit for the resulting (N, min) clouds, and the seeded coefficient
// sampler the experiments share.
//
// Both searches are exact minimizations of the floating-point values defined
// by prime_form_value / shifted_form_value below: the pair loop plus sorted
// binary search visits a candidate set that provably contains the argmin of
// those values, so the result equals an O(n^3) brute force that evaluates the
// same expressions. (Key fact: u -> fl(d - fl(a3 * u)) is monotone, so
// |fl(d - fl(a3 * s))| over a sorted array s is unimodal and its minimum sits
// at the sign-change boundary, which is what the binary search locates.)

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "diophlab/forms.hpp"

namespace diophlab {

struct SearchOutcome {
    std::uint64_t n = 0;                     // box parameter N
    double min_value = 0.0;
    std::array<std::int64_t, 3> argmin{0, 0, 0};
    std::uint64_t evaluations = 0;           // candidate form evaluations
    double elapsed_seconds = 0.0;            // wall time; never serialized
    bool near_zero = false;                  // min_value < 1e-12
};

// The canonical floating evaluation of |p1^2 - a2 p2^2 - a3 p3^2| used by the
// search and by any oracle that wants exact agreement with it.
double prime_form_value(std::uint64_t p1, std::uint64_t p2, std::uint64_t p3,
                        double alpha2, double alpha3);

// Canonical |(x1+t1)^k - a2 (x2+t2)^k - a3 (x3+t3)^k|.
double shifted_form_value(const TernaryForm& form, std::int64_t x1,
                          std::int64_t x2, std::int64_t x3);

// Exact minimum of prime_form_value over prime triples in (N, 2N]^3.
// alpha3 must be positive (the sorted search divides the third coordinate's
// role by it). Throws std::runtime_error when (N, 2N] holds no prime.
SearchOutcome min_prime_form(std::uint64_t N, double alpha2, double alpha3);

// Exact minimum of shifted_form_value over integer triples in (N, 2N]^3.
SearchOutcome min_shifted_form(std::uint64_t N, const TernaryForm& form);

enum class DecayModel { power_law, log_power };

struct DecayFit {
    std::vector<std::pair<double, double>> points; // (N, min) actually fitted
    DecayModel model = DecayModel::power_law;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

// Least squares of log(min) against log N (power_law) or log log N
// (log_power). Points with nonpositive min are dropped with a warning on
// stderr; fewer than 3 surviving points is an error. Points are sorted
// before fitting, so permutations of the input produce identical fits.
DecayFit fit_decay(std::vector<std::pair<double, double>> points, DecayModel model);

// Deterministic uniform samples of alpha3 in [1/2, 1): feeds each raw
// mt19937_64 draw through the usual 53-bit mantissa map. Same seed, same
// list, on any platform.
std::vector<double> sample_alpha3(std::uint64_t seed, std::size_t count);

} // namespace diophlab
