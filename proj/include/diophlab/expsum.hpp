#pragma once

// Oscillatory-sum machinery: the smoothed exponential sums over integers,
// primes and prime powers, Hurwitz-zeta partial sums, the maximal partial-sum
// operator, the van der Corput B-process cross-check, and quadrature of the
// fourth-moment integrals I(kappa, M, alpha).
//
// Convention on frequencies: f1, f2, lambda_sum and hurwitz_partial oscillate
// like exp(i t log(...)) (radian frequency t); bprocess_check and i_kappa use
// e(z) = exp(2 pi i z) throughout, matching how their phases are written.

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "diophlab/arith.hpp"
#include "diophlab/forms.hpp"

namespace diophlab {

enum class SumRestriction { all_integers, primes, von_mangoldt };

// Query for the one-variable sum sum_x w(x/N) exp(i t log(x + theta3)).
// With restriction = primes the index set is exactly the primes in (N, 2N];
// all_integers and von_mangoldt run over the support of the weight, the
// latter attaching the factor Lambda(x).
struct ExpSumQuery {
    double t = 0.0;
    std::uint64_t n = 2;                   // dyadic scale N, >= 2
    double theta3 = 0.0;
    WeightSpec weight = WeightSpec::window();
    SumRestriction restriction = SumRestriction::all_integers;
};

std::complex<double> f2(const ExpSumQuery& q);

// Double sum over (x1, x2) of w1(x1/N) w2(x2/N) exp(i t log(arg)) with
// arg = (x1+t1)^k - alpha2 (x2+t2)^k, w1 supported on [1, 2] and w2 on
// [1/2, 2]. Requires alpha2 * 2^k < 1 so arg stays positive for every pair
// the weights see; a pair that still produces arg <= 0 raises config_error
// naming it.
std::complex<double> f1(double t, std::uint64_t N, const TernaryForm& form);

// sum_n w(n/N) Lambda(n) n^{it} with the default window weight.
std::complex<double> lambda_sum(double t, std::uint64_t N);

// sum_{0 <= n <= |t|} (n + theta)^{-sigma - it}; approximates the Hurwitz
// zeta value zeta(sigma + it, theta) with error O((1 + |t|)^{-sigma}).
// Requires |t| >= 2 and theta in (0, 1].
std::complex<double> hurwitz_partial(double sigma, double t, double theta);

// Prefix-sum points (as (re, im)) of a term sequence, starting from the
// origin; the maximal partial sum is the farthest-pair distance among them.
// Exposed so oracles can share the exact floating values and the exact
// distance expression with maximal_partial_sum.
std::vector<std::array<double, 2>> prefix_points(std::span<const std::complex<double>> terms);
double point_dist_sq(const std::array<double, 2>& p, const std::array<double, 2>& q);

// max over 1 <= N1 <= N2 <= n of |sum_{N1 <= j <= N2} terms[j]|, computed
// exactly as the farthest pair of prefix_points via convex hull (monotone
// chain with robust orientation) + rotating calipers, O(n log n).
double maximal_partial_sum(std::span<const std::complex<double>> terms);

// Comparison of the direct sum sum_{n=M+1}^{2M} e(X (n+theta)^alpha / M^alpha)
// against its stationary-phase transform
//   c * sum_l e(f*(l)) / sqrt(|f''(x_l)|),   c = e^{\pm i pi/4} by sign of f'',
// with l running over the integers in f'([M+1, 2M]), f'(x_l) = l, and
//   f*(l) = (1 - alpha) A^{1/(1-alpha)} (l/alpha)^{abar} + l theta,
//   abar = alpha/(alpha - 1), A = X / M^alpha.
struct BProcessReport {
    double x = 0.0;            // the abscissa X
    std::uint64_t m = 0;
    double alpha = 0.0;
    double theta = 0.0;
    std::int64_t L = 0;        // floor(2^{-|alpha|-1} |alpha| X / M), clamped to >= 1
    std::int64_t L1 = 0;       // floor(2^{2+|alpha|}  |alpha| X / M), clamped to >= L
    double tau = 0.0;          // (1-alpha) (L M / |alpha|)^{abar} X^{1/(1-alpha)}
    std::complex<double> lhs;  // direct sum
    double rhs_main = 0.0;     // |stationary-phase expansion|
    double error = 0.0;        // |lhs - expansion|
    double budget = 0.0;       // sqrt(M), the scale the error is judged against
};

// Requires M >= 2, M <= X <= M^2 (std::out_of_range otherwise) and
// alpha not in {0, 1}.
BProcessReport bprocess_check(double X, std::uint64_t M, double alpha, double theta);

// I(kappa, M, alpha) = int_0^{M^{2-kappa}} |S1|^2 |S2|^2 dx with
// S_i(x) = sum_{M <= m <= 2M} e(x phi_i(m) / M^alpha).
struct IntegralQuery {
    double kappa = 0.5;        // in (0, 1)
    std::uint64_t m = 2;       // M >= 2
    double alpha = 2.0;        // matches phi.alpha
    PhiPair phi;
    double nodes_per_unit = 8; // midpoint-rule density; the integrand
                               // oscillates on an O(1) scale in x
};

// Integrand |S1(x)|^2 |S2(x)|^2 at a single abscissa (used by quadrature and
// by the tests' spot checks).
double i_kappa_integrand(const IntegralQuery& q, double x);

// Composite midpoint quadrature of the integral above; nonnegative.
double i_kappa(const IntegralQuery& q);

} // namespace diophlab
