#pragma once

// Arithmetic primitives: prime sieving, the von Mangoldt function,
// representation counts by sums of two squares / two k-th powers, and the
// smooth cutoff weights shared by all the sum evaluators.

#include <cstdint>
#include <vector>

namespace diophlab {

// Primes p with lo < p <= hi, ascending and complete.
struct PrimeTable {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    std::vector<std::uint64_t> primes;
};

// Segmented sieve of Eratosthenes; handles hi up to ~1e9 in bounded memory.
// Throws std::invalid_argument when hi <= lo.
PrimeTable sieve_primes(std::uint64_t lo, std::uint64_t hi);

// log p when n = p^j for a prime p, else 0. n >= 1.
double von_mangoldt(std::uint64_t n);

// Table of von_mangoldt(n) for n = 0..n_max, filled by marking prime powers.
std::vector<double> von_mangoldt_table(std::uint64_t n_max);

// Ordered integer pairs (a, b) with a^2 + b^2 = m. r2(0) = 1, r2(1) = 4.
std::uint64_t r2(std::uint64_t m);

// Entry m holds r2(m) for m = 0..max_m; built by one pass over the lattice
// points in the quarter disc, so O(max_m) work and memory.
std::vector<std::uint32_t> r2_table(std::uint64_t max_m);

// Ordered pairs with a^k + b^k = m. Even k counts integer pairs of either
// sign, matching r2 when k = 2. Odd k counts nonnegative pairs only:
// with signs allowed every m has infinitely many representations via
// a^k + (-a)^k = 0 padding, so the signed count is not a finite object.
std::uint64_t rk(std::uint64_t m, unsigned k);

enum class WeightKind { odd_bump, window };

// odd_bump: w(x) = x * exp(-1/(1 - x^2)) on (-1, 1), zero outside; an odd
// C-infinity bump. window: w(x) = exp(-1/((x - a)(b - x))) on (a, b), zero
// outside; nonnegative, C-infinity, supported inside [a, b].
struct WeightSpec {
    WeightKind kind = WeightKind::window;
    double a = 0.5; // support endpoints; ignored by odd_bump (fixed (-1,1))
    double b = 2.0;

    static WeightSpec odd_bump() { return {WeightKind::odd_bump, -1.0, 1.0}; }
    static WeightSpec window(double a = 0.5, double b = 2.0) {
        return {WeightKind::window, a, b};
    }
};

double smooth_weight(const WeightSpec& spec, double x);

} // namespace diophlab
