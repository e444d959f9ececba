#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "diophlab/count.hpp"
#include "oracles.hpp"

using namespace diophlab;

namespace {

PhiPair make_phi(double alpha, double beta, double t1, double t2) {
    PhiPair phi;
    phi.alpha = alpha;
    phi.beta = beta;
    phi.theta1 = t1;
    phi.theta2 = t2;
    return phi;
}

double canon_u01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace

TEST_CASE("tiny delta counts exactly the forced diagonal at M = 2") {
    const PhiPair phi = make_phi(2.0, 1.0, 0.3, 0.7);
    const CountOutcome out = count_bruteforce(2, 1e-12, phi);
    CHECK(out.count == 9); // (M+1)^2 quadruples with m1 = m2, m3 = m4
    CHECK(count_sorted(2, 1e-12, phi).count == 9);
}

TEST_CASE("huge delta counts the whole box at M = 8") {
    const PhiPair phi = make_phi(2.0, 1.0, 0.3, 0.7);
    CHECK(count_bruteforce(8, 100.0, phi).count == 6561); // 9^4
    CHECK(count_sorted(8, 100.0, phi).count == 6561);
}

TEST_CASE("frozen count at M = 10") {
    // quadruples with |(m1+0.3)^2 - (m2+0.3)^2 + (m3+0.7)^2 - (m4+0.7)^2|
    // bounded by 0.05 * 10^2 = 5
    const PhiPair phi = make_phi(2.0, 1.0, 0.3, 0.7);
    const CountOutcome brute = count_bruteforce(10, 0.05, phi);
    CHECK(brute.threshold == 5.0);
    CHECK(brute.count == 397);
    CHECK(count_sorted(10, 0.05, phi).count == 397);
}

TEST_CASE("outcome echoes its inputs and method") {
    const PhiPair phi = make_phi(3.0, 2.0, 0.0, 0.0);
    const CountOutcome b = count_bruteforce(4, 0.125, phi);
    const CountOutcome s = count_sorted(4, 0.125, phi);
    CHECK(b.m == 4);
    CHECK(b.delta == 0.125);
    CHECK(b.method == CountMethod::bruteforce);
    CHECK(s.method == CountMethod::sorted);
    CHECK(b.threshold == s.threshold);
    CHECK(b.threshold == 0.125 * std::pow(4.0, 3.0));
}

TEST_CASE("sorted counter equals brute force across a randomized grid") {
    std::mt19937_64 eng(415926u);
    const std::uint64_t ms[] = {5, 9, 14};
    const double alphas[] = {2.0, 3.0, 0.5, -1.0};
    const double betas[] = {1.0, 2.0, -0.7};
    for (std::uint64_t m : ms)
        for (double alpha : alphas)
            for (double beta : betas) {
                const double md = static_cast<double>(m);
                const double deltas[] = {0.0, 1.0 / (md * md), 0.25};
                for (double delta : deltas) {
                    const PhiPair phi =
                        make_phi(alpha, beta, canon_u01(eng), canon_u01(eng));
                    const CountOutcome b = count_bruteforce(m, delta, phi);
                    const CountOutcome s = count_sorted(m, delta, phi);
                    CAPTURE(m);
                    CAPTURE(alpha);
                    CAPTURE(beta);
                    CAPTURE(delta);
                    CHECK(b.count == s.count);
                    CHECK(b.count == oracles::brute_count(m, delta, phi));
                    // diagonal quadruples always satisfy the inequality
                    CHECK(s.count >= (m + 1) * (m + 1));
                    CHECK(s.count <= (m + 1) * (m + 1) * (m + 1) * (m + 1));
                }
            }
}

TEST_CASE("strictly positive and strictly negative sums balance") {
    // swapping (m1, m2) and (m3, m4) negates the canonical floating sum
    // exactly, so the strict counts must be equal integers
    const std::uint64_t m = 7;
    const PhiPair phi = make_phi(2.0, -0.7, 0.123, 0.456);
    const std::size_t n = m + 1;
    std::vector<double> v1(n), v2(n);
    for (std::size_t i = 0; i < n; ++i) {
        v1[i] = phi.phi1(static_cast<double>(m + i));
        v2[i] = phi.phi2(static_cast<double>(m + i));
    }
    std::uint64_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double a = v1[i] - v1[j];
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    const double s = a + (v2[k] - v2[l]);
                    if (s > 0.0) ++pos;
                    if (s < 0.0) ++neg;
                }
        }
    CHECK(pos == neg);
}

TEST_CASE("brute force refuses boxes past its cap") {
    const PhiPair phi = make_phi(2.0, 1.0, 0.0, 0.0);
    CHECK_THROWS_AS(count_bruteforce(49, 0.1, phi), std::invalid_argument);
    CHECK_NOTHROW(count_sorted(49, 0.1, phi));
}

TEST_CASE("negative delta is rejected") {
    const PhiPair phi = make_phi(2.0, 1.0, 0.0, 0.0);
    CHECK_THROWS_AS(count_sorted(4, -1.0, phi), std::invalid_argument);
    CHECK_THROWS_AS(count_bruteforce(4, -1.0, phi), std::invalid_argument);
}

TEST_CASE("quadratic box count equals a direct quadruple scan") {
    std::mt19937_64 eng(653589u);
    const std::uint64_t ns[] = {4, 6, 9};
    const double alpha2s[] = {std::sqrt(2.0), 0.7};
    for (std::uint64_t N : ns)
        for (double a2 : alpha2s) {
            const double betas[] = {0.0, 1.0, static_cast<double>(N),
                                    canon_u01(eng) * 10.0};
            for (double beta : betas) {
                const std::size_t n = static_cast<std::size_t>(N) + 1;
                std::vector<double> sq(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double y = static_cast<double>(N + i);
                    sq[i] = y * y;
                }
                std::uint64_t want = 0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        const double a = sq[i] - sq[j];
                        for (std::size_t k = 0; k < n; ++k)
                            for (std::size_t l = 0; l < n; ++l)
                                if (std::fabs(a - a2 * (sq[k] - sq[l])) <= beta)
                                    ++want;
                    }
                CAPTURE(N);
                CAPTURE(a2);
                CAPTURE(beta);
                CHECK(count_quadratic_box(N, beta, a2) == want);
            }
        }
}

TEST_CASE("frozen quadratic box count at N = 256") {
    CHECK(count_quadratic_box(256, 256.0, std::sqrt(2.0)) == 6148753);
}

TEST_CASE("r2 correlation: frozen value and direct oracle") {
    // sum over m <= 5 of r2(m)^2 = 16 + 16 + 0 + 16 + 64
    CHECK(correlation_r2(5, 0) == 112);
    for (const auto& [M, L] : {std::pair<std::uint64_t, std::uint64_t>{50, 7},
                               {30, 0},
                               {12, 25}}) {
        std::uint64_t want = 0;
        for (std::uint64_t l = 0; l <= L; ++l)
            for (std::uint64_t m = 1; m <= M; ++m) want += r2(m) * r2(m + l);
        CHECK(correlation_r2(M, L) == want);
    }
}

TEST_CASE("r2 correlation grows with both box and shift range") {
    CHECK(correlation_r2(100, 0) < correlation_r2(200, 0));
    CHECK(correlation_r2(100, 0) < correlation_r2(100, 5));
}
