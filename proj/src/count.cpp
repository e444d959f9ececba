#include "diophlab/count.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "diophlab/arith.hpp"

namespace diophlab {

namespace {

// The shared value arrays of the counting protocol (see count.hpp).
struct PhiValues {
    std::vector<double> v1;
    std::vector<double> v2;
    double tau;
};

PhiValues phi_values(std::uint64_t M, double delta, const PhiPair& phi) {
    phi.validate();
    if (M < 1) throw std::invalid_argument("count: need M >= 1");
    if (!(delta >= 0.0)) throw std::invalid_argument("count: need delta >= 0");
    PhiValues out;
    out.v1.resize(M + 1);
    out.v2.resize(M + 1);
    for (std::uint64_t i = 0; i <= M; ++i) {
        const double x = static_cast<double>(M + i);
        out.v1[i] = phi.phi1(x);
        out.v2[i] = phi.phi2(x);
    }
    out.tau = delta * std::pow(static_cast<double>(M), phi.alpha);
    if (!std::isfinite(out.tau))
        throw std::invalid_argument("count: threshold delta*M^alpha is not finite");
    return out;
}

std::vector<double> pair_differences(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> d;
    d.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d.push_back(v[i] - v[j]);
    return d;
}

} // namespace

CountOutcome count_bruteforce(std::uint64_t M, double delta, const PhiPair& phi) {
    constexpr std::uint64_t kMaxM = 48;
    if (M > kMaxM)
        throw std::invalid_argument(
            "count_bruteforce: refusing M > 48 (O(M^4) reference only)");
    const PhiValues vals = phi_values(M, delta, phi);

    std::uint64_t count = 0;
    const std::size_t n = vals.v1.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double a = vals.v1[i] - vals.v1[j];
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) {
                    const double b = vals.v2[k] - vals.v2[l];
                    if (std::fabs(a + b) <= vals.tau) ++count;
                }
        }
    return {M, delta, count, CountMethod::bruteforce, vals.tau};
}

CountOutcome count_sorted(std::uint64_t M, double delta, const PhiPair& phi) {
    const PhiValues vals = phi_values(M, delta, phi);

    std::vector<double> A = pair_differences(vals.v1);
    std::vector<double> B = pair_differences(vals.v2);
    std::sort(A.begin(), A.end());
    std::sort(B.begin(), B.end());

    // For ascending a, both boundaries below only ever move left:
    // fl(a + b) is nondecreasing in either argument, so {b : fl(a+b) <= tau}
    // is a shrinking prefix of B and {b : fl(a+b) >= -tau} a growing suffix.
    const double tau = vals.tau;
    std::uint64_t count = 0;
    std::size_t lo = B.size(); // first index with a + B[idx] >= -tau
    std::size_t hi = B.size(); // one past last index with a + B[idx] <= tau
    for (const double a : A) {
        while (lo > 0 && a + B[lo - 1] >= -tau) --lo;
        while (hi > 0 && a + B[hi - 1] > tau) --hi;
        if (hi > lo) count += hi - lo;
    }
    return {M, delta, count, CountMethod::sorted, tau};
}

std::uint64_t count_quadratic_box(std::uint64_t N, double beta_thresh, double alpha2) {
    if (N < 1) throw std::invalid_argument("count_quadratic_box: need N >= 1");
    if (!(beta_thresh >= 0.0))
        throw std::invalid_argument("count_quadratic_box: need beta >= 0");
    if (!(alpha2 > 0.0))
        throw std::invalid_argument("count_quadratic_box: need alpha2 > 0");

    // y^2 differences are exact integers in double for N up to ~3e7
    std::vector<double> sq(N + 1);
    for (std::uint64_t i = 0; i <= N; ++i) {
        const double y = static_cast<double>(N + i);
        sq[i] = y * y;
    }
    std::vector<double> A = pair_differences(sq); // y1^2 - y2^2
    std::vector<double> B = pair_differences(sq);
    for (double& b : B) b = alpha2 * b;           // alpha2 (y3^2 - y4^2)
    std::sort(A.begin(), A.end());
    std::sort(B.begin(), B.end());

    // Here the compared value is fl(a - b): nondecreasing in a, nonincreasing
    // in b, so for ascending a both boundaries move right.
    const double beta = beta_thresh;
    std::uint64_t count = 0;
    std::size_t lo = 0; // first index with a - B[idx] <= beta
    std::size_t hi = 0; // one past last index with a - B[idx] >= -beta
    for (const double a : A) {
        while (lo < B.size() && a - B[lo] > beta) ++lo;
        while (hi < B.size() && a - B[hi] >= -beta) ++hi;
        if (hi > lo) count += hi - lo;
    }
    return count;
}

std::uint64_t correlation_r2(std::uint64_t M, std::uint64_t L) {
    const auto table = r2_table(M + L);
    std::uint64_t total = 0;
    for (std::uint64_t l = 0; l <= L; ++l)
        for (std::uint64_t m = 1; m <= M; ++m)
            total += static_cast<std::uint64_t>(table[m]) * table[m + l];
    return total;
}

} // namespace diophlab
