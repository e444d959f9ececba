#include "diophlab/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "diophlab/errors.hpp"

namespace diophlab {

namespace {

// Compensated accumulation; the sums here run to ~1e6 terms and the error
// budgets in the tests assume rounding stays controlled.
struct KahanComplex {
    std::complex<double> sum{0.0, 0.0};
    std::complex<double> comp{0.0, 0.0};

    void add(std::complex<double> term) {
        const std::complex<double> y = term - comp;
        const std::complex<double> t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

struct KahanReal {
    double sum = 0.0;
    double comp = 0.0;

    void add(double term) {
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

std::complex<double> unit_phase(double radians) {
    return {std::cos(radians), std::sin(radians)};
}

// e(z) = exp(2 pi i z), reduced mod 1 first so large phases keep precision
std::complex<double> e_of(double z) {
    const double frac = z - std::floor(z);
    const double two_pi = 2.0 * std::numbers::pi;
    return unit_phase(two_pi * frac);
}

} // namespace

std::complex<double> f2(const ExpSumQuery& q) {
    if (q.n < 2) throw std::invalid_argument("f2: need N >= 2");
    const double n = static_cast<double>(q.n);
    KahanComplex acc;

    auto add_term = [&](double x, double factor) {
        const double wgt = smooth_weight(q.weight, x / n) * factor;
        if (wgt == 0.0) return;
        const double arg = x + q.theta3;
        if (!(arg > 0.0))
            throw std::domain_error("f2: log argument nonpositive at x = " +
                                    std::to_string(x));
        acc.add(wgt * unit_phase(q.t * std::log(arg)));
    };

    switch (q.restriction) {
    case SumRestriction::all_integers: {
        const auto lo = static_cast<std::int64_t>(std::ceil(q.weight.a * n));
        const auto hi = static_cast<std::int64_t>(std::floor(q.weight.b * n));
        for (std::int64_t x = lo; x <= hi; ++x)
            add_term(static_cast<double>(x), 1.0);
        break;
    }
    case SumRestriction::primes: {
        for (std::uint64_t p : sieve_primes(q.n, 2 * q.n).primes)
            add_term(static_cast<double>(p), 1.0);
        break;
    }
    case SumRestriction::von_mangoldt: {
        const auto hi = static_cast<std::uint64_t>(std::floor(q.weight.b * n));
        const auto table = von_mangoldt_table(hi);
        const auto lo =
            static_cast<std::uint64_t>(std::max(1.0, std::ceil(q.weight.a * n)));
        for (std::uint64_t x = lo; x <= hi; ++x)
            if (table[x] != 0.0) add_term(static_cast<double>(x), table[x]);
        break;
    }
    }
    return acc.sum;
}

std::complex<double> f1(double t, std::uint64_t N, const TernaryForm& form) {
    form.validate();
    if (N < 2) throw std::invalid_argument("f1: need N >= 2");
    const WeightSpec w1 = WeightSpec::window(1.0, 2.0);
    const WeightSpec w2 = WeightSpec::window(0.5, 2.0);
    // sufficient condition for the log argument to stay positive on the
    // support: the largest alpha2 (x2+t2)^k the x2-weight admits stays below
    // the smallest (x1+t1)^k the x1-weight admits, i.e. alpha2 * 2^k < 1
    if (!(form.alpha2 * std::pow(2.0, static_cast<double>(form.k)) < 1.0))
        throw config_error(
            "f1: alpha2 * 2^k must be < 1 to keep the log argument positive "
            "(alpha2 = " +
            std::to_string(form.alpha2) + ", k = " + std::to_string(form.k) + ")");

    const double n = static_cast<double>(N);
    const double k = static_cast<double>(form.k);
    const auto lo1 = static_cast<std::int64_t>(std::ceil(n));
    const auto hi1 = static_cast<std::int64_t>(std::floor(2.0 * n));
    const auto lo2 = static_cast<std::int64_t>(std::ceil(0.5 * n));
    const auto hi2 = hi1;

    std::vector<double> w2v, e2v;
    std::vector<std::int64_t> x2v;
    for (std::int64_t x2 = lo2; x2 <= hi2; ++x2) {
        const double wb = smooth_weight(w2, static_cast<double>(x2) / n);
        if (wb == 0.0) continue;
        x2v.push_back(x2);
        w2v.push_back(wb);
        e2v.push_back(std::pow(static_cast<double>(x2) + form.theta[1], k));
    }

    KahanComplex acc;
    for (std::int64_t x1 = lo1; x1 <= hi1; ++x1) {
        const double wa = smooth_weight(w1, static_cast<double>(x1) / n);
        if (wa == 0.0) continue;
        const double e1 = std::pow(static_cast<double>(x1) + form.theta[0], k);
        for (std::size_t idx = 0; idx < x2v.size(); ++idx) {
            const double arg = e1 - form.alpha2 * e2v[idx];
            if (!(arg > 0.0))
                throw config_error("f1: log argument nonpositive at (x1, x2) = (" +
                                   std::to_string(x1) + ", " +
                                   std::to_string(x2v[idx]) + ")");
            acc.add(wa * w2v[idx] * unit_phase(t * std::log(arg)));
        }
    }
    return acc.sum;
}

std::complex<double> lambda_sum(double t, std::uint64_t N) {
    if (N < 2) throw std::invalid_argument("lambda_sum: need N >= 2");
    const WeightSpec w = WeightSpec::window();
    const double n = static_cast<double>(N);
    const auto table = von_mangoldt_table(2 * N);
    KahanComplex acc;
    for (std::uint64_t x = std::max<std::uint64_t>(1, N / 2); x <= 2 * N; ++x) {
        if (table[x] == 0.0) continue;
        const double wgt = smooth_weight(w, static_cast<double>(x) / n);
        if (wgt == 0.0) continue;
        acc.add(wgt * table[x] *
                unit_phase(t * std::log(static_cast<double>(x))));
    }
    return acc.sum;
}

std::complex<double> hurwitz_partial(double sigma, double t, double theta) {
    if (!(sigma >= 0.5 && sigma <= 1.5))
        throw std::invalid_argument("hurwitz_partial: sigma must be in [1/2, 3/2]");
    if (!(std::fabs(t) >= 2.0))
        throw std::invalid_argument("hurwitz_partial: need |t| >= 2");
    if (!(theta > 0.0 && theta <= 1.0))
        throw std::domain_error("hurwitz_partial: theta must be in (0, 1]");
    const auto n_max = static_cast<std::uint64_t>(std::floor(std::fabs(t)));
    KahanComplex acc;
    for (std::uint64_t n = 0; n <= n_max; ++n) {
        const double base = static_cast<double>(n) + theta;
        const double mag = std::pow(base, -sigma);
        acc.add(mag * unit_phase(-t * std::log(base)));
    }
    return acc.sum;
}

// --- maximal partial sum ----------------------------------------------------

std::vector<std::array<double, 2>> prefix_points(
    std::span<const std::complex<double>> terms) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(terms.size() + 1);
    double re = 0.0, im = 0.0;
    pts.push_back({re, im});
    for (const auto& z : terms) {
        re += z.real();
        im += z.imag();
        pts.push_back({re, im});
    }
    return pts;
}

double point_dist_sq(const std::array<double, 2>& p, const std::array<double, 2>& q) {
    const double dx = p[0] - q[0];
    const double dy = p[1] - q[1];
    return dx * dx + dy * dy;
}

namespace {

using Point = std::array<double, 2>;

// a + b = s + err exactly (Knuth)
inline void two_sum(double a, double b, double& s, double& err) {
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    err = (a - av) + (b - bv);
}

// a * b = p + err exactly
inline void two_prod(double a, double b, double& p, double& err) {
    p = a * b;
    err = std::fma(a, b, -p);
}

// Exact sign of a sum of doubles: fold each term into a nonoverlapping
// expansion (Shewchuk's grow-expansion); the sign of the expansion is the
// sign of its largest-magnitude (last nonzero) component.
int sign_of_sum(std::span<const double> terms) {
    double expansion[32];
    std::size_t len = 0;
    for (double b : terms) {
        double q = b;
        std::size_t out = 0;
        for (std::size_t i = 0; i < len; ++i) {
            double s, err;
            two_sum(q, expansion[i], s, err);
            if (err != 0.0) expansion[out++] = err;
            q = s;
        }
        if (q != 0.0) expansion[out++] = q;
        len = out;
    }
    if (len == 0) return 0;
    return expansion[len - 1] > 0.0 ? 1 : -1;
}

// Orientation of the triangle (a, b, c): sign of (a-c) x (b-c). A cheap
// filter answers the easy cases; otherwise the determinant is reduced to an
// exact sum of product and difference tails, so near-collinear triples are
// never misclassified and the hull cannot drop a true vertex.
int orient(const Point& a, const Point& b, const Point& c) {
    const double acx = a[0] - c[0], acy = a[1] - c[1];
    const double bcx = b[0] - c[0], bcy = b[1] - c[1];
    const double l = acx * bcy;
    const double r = acy * bcx;
    const double det = l - r;
    const double mag = std::fabs(l) + std::fabs(r);
    // the rounded differences and products stay within (mag * 2^-50) of det
    if (std::fabs(det) > mag * 0x1.0p-50) return det > 0.0 ? 1 : -1;

    // exact: re-derive each difference with its rounding tail, expand the
    // two products of double-doubles into exact partial products
    double d1h, d1l, d2h, d2l, d3h, d3l, d4h, d4l;
    two_sum(a[0], -c[0], d1h, d1l);
    two_sum(b[1], -c[1], d2h, d2l);
    two_sum(a[1], -c[1], d3h, d3l);
    two_sum(b[0], -c[0], d4h, d4l);
    double terms[16];
    std::size_t n = 0;
    auto push_products = [&](double uh, double ul, double vh, double vl,
                             double sign) {
        const double parts[4][2] = {{uh, vh}, {uh, vl}, {ul, vh}, {ul, vl}};
        for (const auto& pr : parts) {
            double p, err;
            two_prod(pr[0], pr[1], p, err);
            terms[n++] = sign * p;
            terms[n++] = sign * err;
        }
    };
    push_products(d1h, d1l, d2h, d2l, +1.0);
    push_products(d3h, d3l, d4h, d4l, -1.0);
    return sign_of_sum(std::span<const double>(terms, n));
}

// Monotone chain; keeps exactly the strictly convex vertices.
std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Point> hull(2 * n);
    std::size_t h = 0;
    for (std::size_t i = 0; i < n; ++i) { // lower
        while (h >= 2 && orient(hull[h - 2], hull[h - 1], pts[i]) <= 0) --h;
        hull[h++] = pts[i];
    }
    const std::size_t lower = h + 1;
    for (std::size_t i = n - 1; i-- > 0;) { // upper
        while (h >= lower && orient(hull[h - 2], hull[h - 1], pts[i]) <= 0) --h;
        hull[h++] = pts[i];
    }
    hull.resize(h - 1); // last point equals the first
    return hull;
}

} // namespace

double maximal_partial_sum(std::span<const std::complex<double>> terms) {
    if (terms.empty())
        throw std::invalid_argument("maximal_partial_sum: empty sequence");
    const auto pts = prefix_points(terms);
    const auto hull = convex_hull(pts);

    double best = 0.0;
    if (hull.size() <= 2) {
        for (std::size_t i = 0; i < hull.size(); ++i)
            for (std::size_t j = i + 1; j < hull.size(); ++j)
                best = std::max(best, point_dist_sq(hull[i], hull[j]));
        return std::sqrt(best);
    }

    // rotating calipers over antipodal pairs
    const std::size_t h = hull.size();
    std::size_t j = 1;
    for (std::size_t i = 0; i < h; ++i) {
        const Point& a = hull[i];
        const Point& b = hull[(i + 1) % h];
        // advance j while the next vertex is farther from edge (a, b)
        auto edge_gain = [&](std::size_t idx) {
            const double ex = b[0] - a[0], ey = b[1] - a[1];
            const Point& p = hull[idx % h];
            const Point& q = hull[(idx + 1) % h];
            return ex * (q[1] - p[1]) - ey * (q[0] - p[0]);
        };
        std::size_t steps = 0;
        while (edge_gain(j) > 0.0 && ++steps <= 2 * h) j = (j + 1) % h;
        // checking j's neighbor as well makes a one-early stop of the
        // advance (a rounding tie in edge_gain) harmless
        for (std::size_t cand : {j, (j + 1) % h}) {
            best = std::max(best, point_dist_sq(a, hull[cand]));
            best = std::max(best, point_dist_sq(b, hull[cand]));
        }
    }
    return std::sqrt(best);
}

// --- B-process --------------------------------------------------------------

BProcessReport bprocess_check(double X, std::uint64_t M, double alpha, double theta) {
    if (M < 2) throw std::invalid_argument("bprocess_check: need M >= 2");
    if (alpha == 0.0 || alpha == 1.0)
        throw std::invalid_argument("bprocess_check: alpha must not be 0 or 1");
    const double m = static_cast<double>(M);
    if (!(X >= m && X <= m * m))
        throw std::out_of_range("bprocess_check: X must lie in [M, M^2]");

    BProcessReport rep;
    rep.x = X;
    rep.m = M;
    rep.alpha = alpha;
    rep.theta = theta;
    rep.budget = std::sqrt(m);

    const double abar = alpha / (alpha - 1.0);
    const double A = X / std::pow(m, alpha);

    // direct sum over n = M+1 .. 2M
    KahanComplex lhs;
    for (std::uint64_t n = M + 1; n <= 2 * M; ++n) {
        const double u = static_cast<double>(n) + theta;
        lhs.add(e_of(A * std::pow(u, alpha)));
    }
    rep.lhs = lhs.sum;

    // stationary-phase side: l runs over the integers in f'([M+1, 2M])
    auto fprime = [&](double u) { return A * alpha * std::pow(u + theta, alpha - 1.0); };
    const double fp_a = fprime(static_cast<double>(M + 1));
    const double fp_b = fprime(static_cast<double>(2 * M));
    const double lo = std::min(fp_a, fp_b);
    const double hi = std::max(fp_a, fp_b);
    const auto l_first = static_cast<std::int64_t>(std::ceil(lo));
    const auto l_last = static_cast<std::int64_t>(std::floor(hi));

    const double fpp_sign = alpha * (alpha - 1.0) > 0.0 ? 1.0 : -1.0;
    const std::complex<double> c =
        unit_phase(fpp_sign * std::numbers::pi / 4.0);

    KahanComplex expansion;
    const double a_pow = std::pow(A, 1.0 / (1.0 - alpha));
    for (std::int64_t l = l_first; l <= l_last; ++l) {
        const double ld = static_cast<double>(l);
        // f'(x_l) = l  =>  x_l + theta = (l / (A alpha))^{1/(alpha-1)}
        const double xl_sh = std::pow(ld / (A * alpha), 1.0 / (alpha - 1.0));
        const double fstar =
            (1.0 - alpha) * a_pow * std::pow(ld / alpha, abar) + ld * theta;
        const double fpp =
            std::fabs(A * alpha * (alpha - 1.0)) * std::pow(xl_sh, alpha - 2.0);
        expansion.add(e_of(fstar) / std::sqrt(fpp));
    }
    const std::complex<double> rhs = c * expansion.sum;
    rep.rhs_main = std::abs(rhs);
    rep.error = std::abs(rep.lhs - rhs);

    const double scale = std::fabs(alpha) * X / m;
    const auto raw_l = static_cast<std::int64_t>(
        std::floor(std::pow(2.0, -std::fabs(alpha) - 1.0) * scale));
    const auto raw_l1 = static_cast<std::int64_t>(
        std::floor(std::pow(2.0, 2.0 + std::fabs(alpha)) * scale));
    rep.L = std::max<std::int64_t>(1, raw_l);
    rep.L1 = std::max(rep.L, raw_l1);
    rep.tau = (1.0 - alpha) *
              std::pow(static_cast<double>(rep.L) * m / std::fabs(alpha), abar) *
              std::pow(X, 1.0 / (1.0 - alpha));
    return rep;
}

// --- I(kappa, M, alpha) -----------------------------------------------------

namespace {

std::vector<double> phase_coeffs(const IntegralQuery& q, bool second) {
    const double m_alpha = std::pow(static_cast<double>(q.m), q.alpha);
    std::vector<double> out(q.m + 1);
    for (std::uint64_t i = 0; i <= q.m; ++i) {
        const double x = static_cast<double>(q.m + i);
        out[i] = (second ? q.phi.phi2(x) : q.phi.phi1(x)) / m_alpha;
    }
    return out;
}

double sum_sq(const std::vector<double>& coeffs, double x) {
    KahanComplex s;
    for (const double u : coeffs) s.add(e_of(x * u));
    const double re = s.sum.real(), im = s.sum.imag();
    return re * re + im * im;
}

} // namespace

double i_kappa_integrand(const IntegralQuery& q, double x) {
    return sum_sq(phase_coeffs(q, false), x) * sum_sq(phase_coeffs(q, true), x);
}

double i_kappa(const IntegralQuery& q) {
    if (!(q.kappa > 0.0 && q.kappa < 1.0))
        throw std::invalid_argument("i_kappa: kappa must be in (0, 1)");
    if (q.m < 2) throw std::invalid_argument("i_kappa: need M >= 2");
    q.phi.validate();
    if (q.phi.alpha != q.alpha)
        throw std::invalid_argument("i_kappa: query alpha must match phi.alpha");
    if (!(q.nodes_per_unit > 0.0))
        throw std::invalid_argument("i_kappa: nodes_per_unit must be positive");

    const double upper = std::pow(static_cast<double>(q.m), 2.0 - q.kappa);
    const auto nodes =
        static_cast<std::uint64_t>(std::ceil(upper * q.nodes_per_unit));
    const double h = upper / static_cast<double>(nodes);

    const auto u1 = phase_coeffs(q, false);
    const auto u2 = phase_coeffs(q, true);
    KahanReal acc;
    for (std::uint64_t j = 0; j < nodes; ++j) {
        const double x = (static_cast<double>(j) + 0.5) * h;
        acc.add(sum_sq(u1, x) * sum_sq(u2, x));
    }
    return acc.sum * h;
}

} // namespace diophlab
