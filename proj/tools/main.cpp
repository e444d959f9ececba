// Command-line front end: one subcommand per experiment plus "summarize".
// Every experiment accepts --config (JSON) and flag overrides; rows land in
// <out>/<experiment>.csv with a JSON summary next to it. Exit codes: 0 ok,
// 1 bad config or arguments, 2 runtime failure, 3 --check failed.

#include <cstdio>
#include <exception>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diophlab/errors.hpp"
#include "diophlab/experiments.hpp"

namespace {

using diophlab::ExperimentConfig;
using diophlab::ExperimentKind;

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out_dir;
    std::string format = "csv";
    bool check = false;

    CLI::Option* config = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* format_opt = nullptr;
    CLI::Option* check_opt = nullptr;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    f.config = sub->add_option("--config", f.config_path,
                               "JSON config file; flags override its fields");
    f.seed_opt = sub->add_option("--seed", f.seed, "RNG seed for sampled grids");
    f.workers_opt =
        sub->add_option("--workers", f.workers, "worker threads (rows stay in grid order)");
    f.out_opt = sub->add_option("--out", f.out_dir,
                                "output directory (default: $DIOPHLAB_OUT or .)");
    f.format_opt = sub->add_option("--format", f.format, "csv or json")
                       ->check(CLI::IsMember({"csv", "json"}));
    f.check_opt = sub->add_flag("--check", f.check,
                                "run the experiment's self-check; exit 3 on failure");
}

ExperimentConfig base_config(const CommonFlags& f, ExperimentKind kind) {
    ExperimentConfig cfg;
    cfg.out_dir.clear();
    if (f.config->count()) {
        cfg = diophlab::load_config(f.config_path);
        if (cfg.experiment != kind)
            throw diophlab::config_error(
                std::string("config is for experiment '") +
                diophlab::experiment_name(cfg.experiment) +
                "', subcommand wants '" + diophlab::experiment_name(kind) + "'");
    }
    cfg.experiment = kind;
    if (f.seed_opt->count()) cfg.seed = f.seed;
    if (f.workers_opt->count()) cfg.workers = f.workers;
    if (f.out_opt->count()) cfg.out_dir = f.out_dir;
    if (f.format_opt->count()) cfg.format = f.format;
    if (f.check_opt->count()) cfg.check = f.check;
    return cfg;
}

int run_experiment(const ExperimentConfig& cfg) {
    diophlab::validate_config(cfg);
    const diophlab::ExperimentReport report = diophlab::run(cfg);
    std::cout << report.summary_json << "\n";
    if (cfg.check && !report.check_passed) {
        std::cerr << "check failed for " << diophlab::experiment_name(cfg.experiment)
                  << "\n";
        return 3;
    }
    return 0;
}

// apply-if-given helper for scalar overrides
template <typename T>
void maybe(CLI::Option* opt, T& dst, const T& src) {
    if (opt && opt->count()) dst = src;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for ternary diagonal Diophantine inequalities"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "0.1.0");

    // search-prime -----------------------------------------------------------
    auto* sp = app.add_subcommand(
        "search-prime", "minimize |p1^2 - a2 p2^2 - a3 p3^2| over primes in (N, 2N]");
    CommonFlags sp_f;
    add_common(sp, sp_f);
    std::vector<std::uint64_t> sp_n;
    std::size_t sp_samples = 1;
    double sp_alpha2 = 1.0, sp_alpha3 = 0.75;
    std::string sp_threshold;
    auto* sp_n_opt = sp->add_option("--n", sp_n, "grid of N values");
    auto* sp_samples_opt = sp->add_option("--samples", sp_samples, "alpha3 draws per N");
    auto* sp_alpha2_opt = sp->add_option("--alpha2", sp_alpha2, "coefficient alpha2");
    auto* sp_alpha3_opt =
        sp->add_option("--alpha3", sp_alpha3, "fix alpha3 instead of sampling");
    auto* sp_thr_opt = sp->add_option(
        "--threshold", sp_threshold,
        "exceptional threshold expression in N (e.g. 'logN^-3')");

    // search-shifted ----------------------------------------------------------
    auto* ss = app.add_subcommand(
        "search-shifted",
        "minimize |(x1+t1)^k - a2 (x2+t2)^k - a3 (x3+t3)^k| over integers in (N, 2N]");
    CommonFlags ss_f;
    add_common(ss, ss_f);
    std::vector<std::uint64_t> ss_n;
    std::size_t ss_samples = 1;
    unsigned ss_k = 2;
    double ss_alpha2 = 1.0, ss_alpha3 = 0.75;
    std::vector<double> ss_theta;
    std::string ss_threshold;
    auto* ss_n_opt = ss->add_option("--n", ss_n, "grid of N values");
    auto* ss_samples_opt = ss->add_option("--samples", ss_samples, "alpha3 draws per N");
    auto* ss_k_opt = ss->add_option("--k", ss_k, "exponent k >= 2");
    auto* ss_alpha2_opt = ss->add_option("--alpha2", ss_alpha2, "coefficient alpha2");
    auto* ss_alpha3_opt =
        ss->add_option("--alpha3", ss_alpha3, "fix alpha3 instead of sampling");
    auto* ss_theta_opt =
        ss->add_option("--theta", ss_theta, "the three shifts")->expected(3);
    auto* ss_thr_opt =
        ss->add_option("--threshold", ss_threshold, "exceptional threshold expression");

    // count-ineq ---------------------------------------------------------------
    auto* ci = app.add_subcommand(
        "count-ineq",
        "count quadruples with |phi1(m1)-phi1(m2)+phi2(m3)-phi2(m4)| <= delta M^alpha");
    CommonFlags ci_f;
    add_common(ci, ci_f);
    std::vector<std::uint64_t> ci_m;
    std::string ci_delta;
    double ci_alpha = 2.0, ci_beta = 1.0, ci_t1 = 0.0, ci_t2 = 0.0;
    bool ci_brute = false;
    auto* ci_m_opt = ci->add_option("--m", ci_m, "grid of M values");
    auto* ci_delta_opt = ci->add_option(
        "--delta", ci_delta, "delta schedule expression in M (default 'M^-2')");
    auto* ci_alpha_opt = ci->add_option("--alpha", ci_alpha, "exponent alpha");
    auto* ci_beta_opt = ci->add_option("--beta", ci_beta, "coefficient beta");
    auto* ci_t1_opt = ci->add_option("--theta1", ci_t1, "shift in phi1");
    auto* ci_t2_opt = ci->add_option("--theta2", ci_t2, "shift in phi2");
    auto* ci_brute_opt = ci->add_flag("--bruteforce", ci_brute,
                                      "also run the O(M^4) reference count");

    // correlation ----------------------------------------------------------------
    auto* co = app.add_subcommand(
        "correlation", "shifted convolution sum of r2 over l in an L grid");
    CommonFlags co_f;
    add_common(co, co_f);
    std::vector<std::uint64_t> co_m, co_l;
    auto* co_m_opt = co->add_option("--m", co_m, "grid of M values");
    auto* co_l_opt = co->add_option("--l", co_l, "grid of L values");

    // bprocess-check ---------------------------------------------------------------
    auto* bp = app.add_subcommand(
        "bprocess-check",
        "stationary-phase transform vs direct evaluation of sum e(X((n+theta)/M)^alpha)");
    CommonFlags bp_f;
    add_common(bp, bp_f);
    std::vector<std::uint64_t> bp_m;
    std::vector<double> bp_alpha, bp_theta;
    std::size_t bp_xc = 10;
    auto* bp_m_opt = bp->add_option("--m", bp_m, "grid of M values");
    auto* bp_alpha_opt = bp->add_option("--alpha", bp_alpha, "alpha values (not 0 or 1)");
    auto* bp_theta_opt = bp->add_option("--theta", bp_theta, "shift values");
    auto* bp_xc_opt =
        bp->add_option("--x-count", bp_xc, "X values log-spaced in [M, M^2]");

    // ikappa -------------------------------------------------------------------------
    auto* ik = app.add_subcommand(
        "ikappa", "fourth-moment integral I(kappa, M, alpha) by midpoint quadrature");
    CommonFlags ik_f;
    add_common(ik, ik_f);
    std::vector<std::uint64_t> ik_m;
    double ik_kappa = 0.5, ik_alpha = 2.0, ik_beta = 1.0, ik_t1 = 0.0, ik_t2 = 0.0;
    auto* ik_m_opt = ik->add_option("--m", ik_m, "grid of M values");
    auto* ik_kappa_opt = ik->add_option("--kappa", ik_kappa, "kappa in (0, 1)");
    auto* ik_alpha_opt = ik->add_option("--alpha", ik_alpha, "exponent alpha");
    auto* ik_beta_opt = ik->add_option("--beta", ik_beta, "coefficient beta");
    auto* ik_t1_opt = ik->add_option("--theta1", ik_t1, "shift in phi1");
    auto* ik_t2_opt = ik->add_option("--theta2", ik_t2, "shift in phi2");

    // expsum-scan -----------------------------------------------------------------------
    auto* es = app.add_subcommand(
        "expsum-scan",
        "modulus of a smoothed exponential sum over a t grid (kinds: f2, lambda, f1)");
    CommonFlags es_f;
    add_common(es, es_f);
    std::vector<double> es_t;
    std::string es_kind = "f2";
    std::uint64_t es_n = 1000;
    unsigned es_k = 2;
    double es_alpha2 = 0.2, es_alpha3 = 0.5, es_theta3 = 0.0;
    auto* es_t_opt = es->add_option("--t", es_t, "grid of t values");
    auto* es_kind_opt = es->add_option("--kind", es_kind, "f2, lambda or f1")
                            ->check(CLI::IsMember({"f2", "lambda", "f1"}));
    auto* es_n_opt = es->add_option("--n", es_n, "dyadic scale N");
    auto* es_k_opt = es->add_option("--k", es_k, "exponent k (f1 only)");
    auto* es_alpha2_opt = es->add_option("--alpha2", es_alpha2, "alpha2 (f1 only)");
    auto* es_alpha3_opt = es->add_option("--alpha3", es_alpha3, "alpha3 (f1 only)");
    auto* es_t3_opt = es->add_option("--theta3", es_theta3, "shift theta3 (f2 only)");

    // summarize ----------------------------------------------------------------------------
    auto* su = app.add_subcommand(
        "summarize", "recompute the stats block of a summary from an emitted CSV");
    std::string su_path;
    su->add_option("csv", su_path, "CSV file written by an experiment")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (su->parsed()) {
            std::cout << diophlab::summarize_csv(su_path) << "\n";
            return 0;
        }

        ExperimentConfig cfg;
        if (sp->parsed()) {
            cfg = base_config(sp_f, ExperimentKind::search_prime);
            maybe(sp_n_opt, cfg.n_grid, sp_n);
            maybe(sp_samples_opt, cfg.samples, sp_samples);
            maybe(sp_alpha2_opt, cfg.alpha2, sp_alpha2);
            if (sp_alpha3_opt->count()) cfg.alpha3_fixed = sp_alpha3;
            maybe(sp_thr_opt, cfg.threshold_expr, sp_threshold);
        } else if (ss->parsed()) {
            cfg = base_config(ss_f, ExperimentKind::search_shifted);
            maybe(ss_n_opt, cfg.n_grid, ss_n);
            maybe(ss_samples_opt, cfg.samples, ss_samples);
            maybe(ss_k_opt, cfg.k, ss_k);
            maybe(ss_alpha2_opt, cfg.alpha2, ss_alpha2);
            if (ss_alpha3_opt->count()) cfg.alpha3_fixed = ss_alpha3;
            if (ss_theta_opt->count())
                std::copy(ss_theta.begin(), ss_theta.end(), cfg.theta.begin());
            maybe(ss_thr_opt, cfg.threshold_expr, ss_threshold);
        } else if (ci->parsed()) {
            cfg = base_config(ci_f, ExperimentKind::count_ineq);
            maybe(ci_m_opt, cfg.m_grid, ci_m);
            maybe(ci_delta_opt, cfg.delta_expr, ci_delta);
            maybe(ci_alpha_opt, cfg.phi.alpha, ci_alpha);
            maybe(ci_beta_opt, cfg.phi.beta, ci_beta);
            maybe(ci_t1_opt, cfg.phi.theta1, ci_t1);
            maybe(ci_t2_opt, cfg.phi.theta2, ci_t2);
            maybe(ci_brute_opt, cfg.with_bruteforce, ci_brute);
        } else if (co->parsed()) {
            cfg = base_config(co_f, ExperimentKind::correlation);
            maybe(co_m_opt, cfg.m_grid, co_m);
            maybe(co_l_opt, cfg.l_grid, co_l);
        } else if (bp->parsed()) {
            cfg = base_config(bp_f, ExperimentKind::bprocess);
            maybe(bp_m_opt, cfg.m_grid, bp_m);
            maybe(bp_alpha_opt, cfg.bp_alphas, bp_alpha);
            maybe(bp_theta_opt, cfg.bp_thetas, bp_theta);
            maybe(bp_xc_opt, cfg.bp_x_count, bp_xc);
        } else if (ik->parsed()) {
            cfg = base_config(ik_f, ExperimentKind::ikappa);
            maybe(ik_m_opt, cfg.m_grid, ik_m);
            maybe(ik_kappa_opt, cfg.kappa, ik_kappa);
            maybe(ik_alpha_opt, cfg.phi.alpha, ik_alpha);
            maybe(ik_beta_opt, cfg.phi.beta, ik_beta);
            maybe(ik_t1_opt, cfg.phi.theta1, ik_t1);
            maybe(ik_t2_opt, cfg.phi.theta2, ik_t2);
        } else if (es->parsed()) {
            cfg = base_config(es_f, ExperimentKind::expsum_scan);
            maybe(es_t_opt, cfg.t_grid, es_t);
            maybe(es_kind_opt, cfg.scan_kind, es_kind);
            maybe(es_n_opt, cfg.scan_n, es_n);
            maybe(es_k_opt, cfg.k, es_k);
            maybe(es_alpha2_opt, cfg.alpha2, es_alpha2);
            if (es_alpha3_opt->count()) cfg.alpha3_fixed = es_alpha3;
            if (es_t3_opt->count()) cfg.theta[2] = es_theta3;
        } else {
            std::cerr << "no subcommand\n";
            return 1;
        }
        return run_experiment(cfg);
    } catch (const diophlab::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const diophlab::parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::bad_alloc&) {
        std::cerr << "out of memory\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
