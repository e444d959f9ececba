#include "diophlab/arith.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diophlab {

namespace {

// floor(sqrt(n)) without trusting the double rounding at the boundary.
std::uint64_t isqrt64(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// floor(n^(1/k)), same defensive adjustment.
std::uint64_t iroot64(std::uint64_t n, unsigned k) {
    if (n == 0) return 0;
    auto pow_fits = [&](std::uint64_t base) {
        std::uint64_t acc = 1;
        for (unsigned i = 0; i < k; ++i) {
            if (base != 0 && acc > n / base) return false;
            acc *= base;
        }
        return acc <= n;
    };
    auto r = static_cast<std::uint64_t>(
        std::pow(static_cast<double>(n), 1.0 / static_cast<double>(k)));
    while (r > 0 && !pow_fits(r)) --r;
    while (pow_fits(r + 1)) ++r;
    return r;
}

std::vector<std::uint64_t> simple_sieve(std::uint64_t limit) {
    std::vector<bool> comp(limit + 1, false);
    std::vector<std::uint64_t> out;
    for (std::uint64_t p = 2; p <= limit; ++p) {
        if (comp[p]) continue;
        out.push_back(p);
        for (std::uint64_t q = p * p; q <= limit; q += p) comp[q] = true;
    }
    return out;
}

} // namespace

PrimeTable sieve_primes(std::uint64_t lo, std::uint64_t hi) {
    if (hi <= lo) throw std::invalid_argument("sieve_primes: need hi > lo");
    PrimeTable table;
    table.lo = lo;
    table.hi = hi;

    const std::uint64_t root = isqrt64(hi);
    const auto base = simple_sieve(std::max<std::uint64_t>(root, 2));

    const std::uint64_t first = std::max<std::uint64_t>(lo + 1, 2);
    if (first > hi) return table;

    constexpr std::uint64_t segment = 1u << 20;
    std::vector<bool> comp;
    for (std::uint64_t seg_lo = first; seg_lo <= hi; seg_lo += segment) {
        const std::uint64_t seg_hi = std::min(hi, seg_lo + segment - 1);
        comp.assign(seg_hi - seg_lo + 1, false);
        for (std::uint64_t p : base) {
            if (p * p > seg_hi) break;
            std::uint64_t start = std::max(p * p, ((seg_lo + p - 1) / p) * p);
            for (std::uint64_t q = start; q <= seg_hi; q += p)
                comp[q - seg_lo] = true;
        }
        for (std::uint64_t n = seg_lo; n <= seg_hi; ++n)
            if (!comp[n - seg_lo]) table.primes.push_back(n);
    }
    return table;
}

double von_mangoldt(std::uint64_t n) {
    if (n < 2) return 0.0;
    // find the smallest prime factor, then check n is a pure power of it
    std::uint64_t p = 0;
    if (n % 2 == 0) {
        p = 2;
    } else {
        for (std::uint64_t d = 3; d * d <= n; d += 2) {
            if (n % d == 0) {
                p = d;
                break;
            }
        }
        if (p == 0) return std::log(static_cast<double>(n)); // n prime
    }
    std::uint64_t m = n;
    while (m % p == 0) m /= p;
    return m == 1 ? std::log(static_cast<double>(p)) : 0.0;
}

std::vector<double> von_mangoldt_table(std::uint64_t n_max) {
    std::vector<double> table(n_max + 1, 0.0);
    if (n_max < 2) return table;
    for (std::uint64_t p : sieve_primes(1, n_max).primes) {
        const double lp = std::log(static_cast<double>(p));
        for (std::uint64_t q = p;; q *= p) {
            table[q] = lp;
            if (q > n_max / p) break;
        }
    }
    return table;
}

std::uint64_t r2(std::uint64_t m) {
    std::uint64_t count = 0;
    for (std::uint64_t a = 0; a * a <= m; ++a) {
        const std::uint64_t rest = m - a * a;
        const std::uint64_t b = isqrt64(rest);
        if (b * b != rest) continue;
        count += (a == 0 ? 1 : 2) * (b == 0 ? 1 : 2);
    }
    return count;
}

std::vector<std::uint32_t> r2_table(std::uint64_t max_m) {
    std::vector<std::uint32_t> table(max_m + 1, 0);
    for (std::uint64_t a = 0; a * a <= max_m; ++a) {
        const std::uint32_t ma = a == 0 ? 1 : 2;
        for (std::uint64_t b = 0;; ++b) {
            const std::uint64_t s = a * a + b * b;
            if (s > max_m) break;
            table[s] += ma * (b == 0 ? 1 : 2);
        }
    }
    return table;
}

std::uint64_t rk(std::uint64_t m, unsigned k) {
    if (k < 2) throw std::invalid_argument("rk: need k >= 2");
    auto kpow = [&](std::uint64_t base) {
        std::uint64_t acc = 1;
        for (unsigned i = 0; i < k; ++i) acc *= base;
        return acc;
    };
    std::uint64_t count = 0;
    for (std::uint64_t a = 0;; ++a) {
        const std::uint64_t ak = kpow(a);
        if (ak > m) break;
        const std::uint64_t rest = m - ak;
        const std::uint64_t b = iroot64(rest, k);
        if (kpow(b) != rest) continue;
        if (k % 2 == 0)
            count += (a == 0 ? 1 : 2) * (b == 0 ? 1 : 2);
        else
            count += 1; // nonnegative pairs only; see header
    }
    return count;
}

double smooth_weight(const WeightSpec& spec, double x) {
    switch (spec.kind) {
    case WeightKind::odd_bump: {
        if (!(x > -1.0 && x < 1.0)) return 0.0;
        return x * std::exp(-1.0 / (1.0 - x * x));
    }
    case WeightKind::window: {
        if (!(x > spec.a && x < spec.b)) return 0.0;
        return std::exp(-1.0 / ((x - spec.a) * (spec.b - x)));
    }
    }
    return 0.0;
}

} // namespace diophlab
