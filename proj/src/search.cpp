#include "diophlab/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include "diophlab/arith.hpp"

namespace diophlab {

double prime_form_value(std::uint64_t p1, std::uint64_t p2, std::uint64_t p3,
                        double alpha2, double alpha3) {
    const double s1 = static_cast<double>(p1) * static_cast<double>(p1);
    const double s2 = static_cast<double>(p2) * static_cast<double>(p2);
    const double s3 = static_cast<double>(p3) * static_cast<double>(p3);
    return std::fabs((s1 - alpha2 * s2) - alpha3 * s3);
}

double shifted_form_value(const TernaryForm& form, std::int64_t x1,
                          std::int64_t x2, std::int64_t x3) {
    const double k = static_cast<double>(form.k);
    const double e1 = std::pow(static_cast<double>(x1) + form.theta[0], k);
    const double e2 = std::pow(static_cast<double>(x2) + form.theta[1], k);
    const double e3 = std::pow(static_cast<double>(x3) + form.theta[2], k);
    return std::fabs((e1 - form.alpha2 * e2) - form.alpha3 * e3);
}

namespace {

struct Best {
    double value;
    std::array<std::int64_t, 3> argmin;

    void offer(double v, std::int64_t a, std::int64_t b, std::int64_t c) {
        // strict improvement only, so the first minimizer in scan order wins
        if (v < value) {
            value = v;
            argmin = {a, b, c};
        }
    }
};

// Core of both searches: values d[i] = first-coordinate term minus the
// alpha2 part for the pair (i, j) are compared against the ascending array
// w[idx] = fl(alpha3 * third-coordinate term). g(idx) = fl(d - w[idx]) is
// nonincreasing in idx, so |g| attains its minimum where g changes sign;
// the two elements flanking that boundary are the only candidates.
template <typename Labels>
SearchOutcome pair_scan(std::uint64_t N, const std::vector<double>& first_term,
                        const std::vector<double>& second_term,
                        const std::vector<double>& w, double alpha2,
                        const Labels& labels) {
    SearchOutcome out;
    out.n = N;
    Best best{std::numeric_limits<double>::infinity(), {0, 0, 0}};
    std::uint64_t evals = 0;

    for (std::size_t i = 0; i < first_term.size(); ++i) {
        for (std::size_t j = 0; j < second_term.size(); ++j) {
            const double d = first_term[i] - alpha2 * second_term[j];
            auto it = std::partition_point(
                w.begin(), w.end(), [&](double u) { return u <= d; });
            const std::size_t idx = static_cast<std::size_t>(it - w.begin());
            const std::size_t c1 = idx > 0 ? idx - 1 : idx;
            const std::size_t c2 = idx < w.size() ? idx : idx - 1;
            for (std::size_t c = c1; c <= c2; ++c) {
                const double v = std::fabs(d - w[c]);
                ++evals;
                best.offer(v, labels(0, i), labels(1, j), labels(2, c));
            }
        }
    }
    out.min_value = best.value;
    out.argmin = best.argmin;
    out.evaluations = evals;
    out.near_zero = best.value < 1e-12;
    return out;
}

} // namespace

SearchOutcome min_prime_form(std::uint64_t N, double alpha2, double alpha3) {
    if (N < 10) throw std::invalid_argument("min_prime_form: need N >= 10");
    if (!(alpha3 > 0.0))
        throw std::invalid_argument("min_prime_form: need alpha3 > 0");
    const auto t0 = std::chrono::steady_clock::now();

    const auto table = sieve_primes(N, 2 * N);
    if (table.primes.empty())
        throw std::runtime_error("min_prime_form: no primes in (N, 2N]");
    const auto& primes = table.primes;

    std::vector<double> sq(primes.size());
    std::vector<double> w(primes.size());
    for (std::size_t i = 0; i < primes.size(); ++i) {
        sq[i] = static_cast<double>(primes[i]) * static_cast<double>(primes[i]);
        w[i] = alpha3 * sq[i]; // ascending along with sq
    }

    auto labels = [&](int slot, std::size_t idx) {
        (void)slot;
        return static_cast<std::int64_t>(primes[idx]);
    };
    SearchOutcome out = pair_scan(N, sq, sq, w, alpha2, labels);
    out.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SearchOutcome min_shifted_form(std::uint64_t N, const TernaryForm& form) {
    form.validate();
    if (N < 4) throw std::invalid_argument("min_shifted_form: need N >= 4");
    const auto t0 = std::chrono::steady_clock::now();

    const double k = static_cast<double>(form.k);
    std::vector<double> e1(N), e2(N), w(N);
    for (std::uint64_t i = 0; i < N; ++i) {
        const double x = static_cast<double>(N + 1 + i);
        e1[i] = std::pow(x + form.theta[0], k);
        e2[i] = std::pow(x + form.theta[1], k);
        w[i] = form.alpha3 * std::pow(x + form.theta[2], k);
    }

    auto labels = [&](int slot, std::size_t idx) {
        (void)slot;
        return static_cast<std::int64_t>(N + 1 + idx);
    };
    SearchOutcome out = pair_scan(N, e1, e2, w, form.alpha2, labels);
    out.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

DecayFit fit_decay(std::vector<std::pair<double, double>> points, DecayModel model) {
    DecayFit fit;
    fit.model = model;

    std::vector<std::pair<double, double>> kept;
    for (const auto& [n, v] : points) {
        const bool abscissa_ok =
            model == DecayModel::power_law ? n > 0.0 : n > 1.0;
        if (v > 0.0 && abscissa_ok) {
            kept.emplace_back(n, v);
        } else {
            std::fprintf(stderr,
                         "fit_decay: dropping point (N=%g, min=%g): not usable "
                         "under the chosen model\n",
                         n, v);
        }
    }
    if (kept.size() < 3)
        throw std::invalid_argument("fit_decay: fewer than 3 usable points");
    std::sort(kept.begin(), kept.end());

    const std::size_t n = kept.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = model == DecayModel::power_law
                              ? std::log(kept[i].first)
                              : std::log(std::log(kept[i].first));
        const double ly = std::log(kept[i].second);
        xs[i] = lx;
        ys[i] = ly;
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0)
        throw std::invalid_argument("fit_decay: degenerate abscissas");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;

    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += resid * resid;
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
    fit.points = std::move(kept);
    return fit;
}

std::vector<double> sample_alpha3(std::uint64_t seed, std::size_t count) {
    if (count < 1) throw std::invalid_argument("sample_alpha3: need count >= 1");
    std::mt19937_64 eng(seed);
    std::vector<double> out(count);
    for (double& v : out) {
        const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
        v = 0.5 + 0.5 * u;
    }
    return out;
}

} // namespace diophlab
