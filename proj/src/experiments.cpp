#include "diophlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "diophlab/count.hpp"
#include "diophlab/errors.hpp"
#include "diophlab/expsum.hpp"
#include "diophlab/search.hpp"

namespace diophlab {

namespace {
using json = nlohmann::ordered_json;
constexpr const char* kVersion = "0.1.0";
} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// --- expression mini-language ------------------------------------------------

namespace {

struct ExprParser {
    const std::string& src;
    std::size_t pos = 0;
    const ExprVars& vars;

    [[noreturn]] void fail(const std::string& what) const {
        throw parse_error("expression '" + src + "': " + what + " at position " +
                          std::to_string(pos));
    }

    void skip_ws() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
            ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < src.size() && src[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    // the middle dot U+00B7 doubles as a product sign
    bool eat_mul() {
        skip_ws();
        if (pos < src.size() && src[pos] == '*') {
            ++pos;
            return true;
        }
        if (pos + 1 < src.size() && static_cast<unsigned char>(src[pos]) == 0xC2 &&
            static_cast<unsigned char>(src[pos + 1]) == 0xB7) {
            pos += 2;
            return true;
        }
        return false;
    }

    double var(const std::string& name, const std::optional<double>& slot) {
        if (!slot) fail("variable '" + name + "' is not available here");
        return *slot;
    }

    double atom() {
        skip_ws();
        if (pos >= src.size()) fail("unexpected end of input");
        if (eat('(')) {
            const double v = expr();
            if (!eat(')')) fail("expected ')'");
            return v;
        }
        const char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(src.c_str() + pos, &end);
            if (end == src.c_str() + pos) fail("bad number");
            pos = static_cast<std::size_t>(end - src.c_str());
            return v;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < src.size() &&
                   std::isalnum(static_cast<unsigned char>(src[pos])))
                ++pos;
            const std::string name = src.substr(start, pos - start);
            if (name == "M") return var(name, vars.M);
            if (name == "N") return var(name, vars.N);
            if (name == "k") return var(name, vars.k);
            if (name == "logM") return std::log(var(name, vars.M));
            if (name == "logN") return std::log(var(name, vars.N));
            if (name == "loglogM") return std::log(std::log(var(name, vars.M)));
            if (name == "loglogN") return std::log(std::log(var(name, vars.N)));
            if (name == "inf") return std::numeric_limits<double>::infinity();
            fail("unknown name '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    double power() {
        const double base = atom();
        if (eat('^')) return std::pow(base, factor());
        return base;
    }

    double factor() {
        skip_ws();
        if (eat('-')) return -factor();
        if (eat('+')) return factor();
        return power();
    }

    double term() {
        double v = factor();
        for (;;) {
            if (eat_mul()) {
                v *= factor();
            } else if (eat('/')) {
                v /= factor();
            } else {
                return v;
            }
        }
    }

    double expr() {
        double v = term();
        for (;;) {
            skip_ws();
            if (eat('+')) {
                v += term();
            } else if (pos < src.size() && src[pos] == '-') {
                ++pos;
                v -= term();
            } else {
                return v;
            }
        }
    }

    double parse() {
        const double v = expr();
        skip_ws();
        if (pos != src.size()) fail("trailing input");
        return v;
    }
};

} // namespace

double eval_expr(const std::string& expr, const ExprVars& vars) {
    if (expr.empty()) throw parse_error("expression is empty");
    ExprParser p{expr, 0, vars};
    return p.parse();
}

// --- configuration -----------------------------------------------------------

const char* experiment_name(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::search_prime: return "search_prime";
    case ExperimentKind::search_shifted: return "search_shifted";
    case ExperimentKind::count_ineq: return "count_ineq";
    case ExperimentKind::correlation: return "correlation";
    case ExperimentKind::bprocess: return "bprocess";
    case ExperimentKind::ikappa: return "ikappa";
    case ExperimentKind::expsum_scan: return "expsum_scan";
    }
    return "unknown";
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
    for (ExperimentKind k :
         {ExperimentKind::search_prime, ExperimentKind::search_shifted,
          ExperimentKind::count_ineq, ExperimentKind::correlation,
          ExperimentKind::bprocess, ExperimentKind::ikappa,
          ExperimentKind::expsum_scan})
        if (s == experiment_name(k)) return k;
    throw parse_error("unknown experiment '" + s + "'");
}

template <typename T>
T get_field(const json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw parse_error("field '" + key + "': " + e.what());
    }
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw parse_error("config '" + path + "': " + e.what());
    }

    ExperimentConfig cfg;
    cfg.out_dir.clear(); // empty means: resolve via environment later
    static const std::vector<std::string> known = {
        "experiment", "seed", "workers", "out_dir", "format", "check",
        "n_grid", "samples", "k", "alpha2", "alpha3", "theta", "threshold",
        "m_grid", "delta", "phi", "with_bruteforce", "l_grid",
        "bp_alphas", "bp_thetas", "bp_x_count", "kappa",
        "scan_kind", "t_grid", "scan_n"};
    for (const auto& item : j.items())
        if (std::find(known.begin(), known.end(), item.key()) == known.end())
            throw parse_error("unknown field '" + item.key() + "'");

    if (!j.contains("experiment")) throw parse_error("missing field 'experiment'");
    cfg.experiment = kind_from_string(get_field<std::string>(j, "experiment"));
    if (j.contains("seed")) cfg.seed = get_field<std::uint64_t>(j, "seed");
    if (j.contains("workers")) cfg.workers = get_field<unsigned>(j, "workers");
    if (j.contains("out_dir")) cfg.out_dir = get_field<std::string>(j, "out_dir");
    if (j.contains("format")) cfg.format = get_field<std::string>(j, "format");
    if (j.contains("check")) cfg.check = get_field<bool>(j, "check");
    if (j.contains("n_grid"))
        cfg.n_grid = get_field<std::vector<std::uint64_t>>(j, "n_grid");
    if (j.contains("samples")) cfg.samples = get_field<std::size_t>(j, "samples");
    if (j.contains("k")) cfg.k = get_field<unsigned>(j, "k");
    if (j.contains("alpha2")) cfg.alpha2 = get_field<double>(j, "alpha2");
    if (j.contains("alpha3")) cfg.alpha3_fixed = get_field<double>(j, "alpha3");
    if (j.contains("theta")) {
        const auto v = get_field<std::vector<double>>(j, "theta");
        if (v.size() != 3) throw parse_error("field 'theta': need 3 entries");
        std::copy(v.begin(), v.end(), cfg.theta.begin());
    }
    if (j.contains("threshold"))
        cfg.threshold_expr = get_field<std::string>(j, "threshold");
    if (j.contains("m_grid"))
        cfg.m_grid = get_field<std::vector<std::uint64_t>>(j, "m_grid");
    if (j.contains("delta")) cfg.delta_expr = get_field<std::string>(j, "delta");
    if (j.contains("phi")) {
        const json& p = j.at("phi");
        for (const auto& item : p.items())
            if (item.key() != "alpha" && item.key() != "beta" &&
                item.key() != "theta1" && item.key() != "theta2")
                throw parse_error("unknown field 'phi." + item.key() + "'");
        if (p.contains("alpha")) cfg.phi.alpha = get_field<double>(p, "alpha");
        if (p.contains("beta")) cfg.phi.beta = get_field<double>(p, "beta");
        if (p.contains("theta1")) cfg.phi.theta1 = get_field<double>(p, "theta1");
        if (p.contains("theta2")) cfg.phi.theta2 = get_field<double>(p, "theta2");
    }
    if (j.contains("with_bruteforce"))
        cfg.with_bruteforce = get_field<bool>(j, "with_bruteforce");
    if (j.contains("l_grid"))
        cfg.l_grid = get_field<std::vector<std::uint64_t>>(j, "l_grid");
    if (j.contains("bp_alphas"))
        cfg.bp_alphas = get_field<std::vector<double>>(j, "bp_alphas");
    if (j.contains("bp_thetas"))
        cfg.bp_thetas = get_field<std::vector<double>>(j, "bp_thetas");
    if (j.contains("bp_x_count"))
        cfg.bp_x_count = get_field<std::size_t>(j, "bp_x_count");
    if (j.contains("kappa")) cfg.kappa = get_field<double>(j, "kappa");
    if (j.contains("scan_kind"))
        cfg.scan_kind = get_field<std::string>(j, "scan_kind");
    if (j.contains("t_grid")) cfg.t_grid = get_field<std::vector<double>>(j, "t_grid");
    if (j.contains("scan_n")) cfg.scan_n = get_field<std::uint64_t>(j, "scan_n");

    validate_config(cfg);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.format != "csv" && cfg.format != "json")
        throw parse_error("field 'format': must be csv or json");
    if (cfg.workers < 1) throw parse_error("field 'workers': must be >= 1");

    switch (cfg.experiment) {
    case ExperimentKind::search_prime:
    case ExperimentKind::search_shifted:
        if (cfg.n_grid.empty()) throw parse_error("field 'n_grid': must be nonempty");
        if (!cfg.alpha3_fixed && cfg.samples < 1)
            throw parse_error("field 'samples': must be >= 1");
        if (cfg.alpha3_fixed && !(*cfg.alpha3_fixed >= 0.5 && *cfg.alpha3_fixed <= 1.0))
            throw parse_error("field 'alpha3': must lie in [1/2, 1]");
        if (!(cfg.alpha2 > 0.0)) throw parse_error("field 'alpha2': must be > 0");
        if (cfg.experiment == ExperimentKind::search_shifted && cfg.k < 2)
            throw parse_error("field 'k': must be >= 2");
        if (!cfg.threshold_expr.empty()) {
            const double n0 = static_cast<double>(cfg.n_grid.front());
            const double v = eval_expr(cfg.threshold_expr,
                                       {n0, n0, static_cast<double>(cfg.k)});
            if (std::isnan(v))
                throw parse_error("field 'threshold': evaluates to NaN");
        }
        break;
    case ExperimentKind::count_ineq: {
        if (cfg.m_grid.empty()) throw parse_error("field 'm_grid': must be nonempty");
        cfg.phi.validate();
        for (std::uint64_t m : cfg.m_grid) {
            const double md = static_cast<double>(m);
            const double d = eval_expr(cfg.delta_expr, {md, md, std::nullopt});
            if (!(d > 0.0) || !std::isfinite(d))
                throw parse_error("field 'delta': schedule must be positive and "
                                  "finite on every grid point (M = " +
                                  std::to_string(m) + ")");
            if (cfg.with_bruteforce && m > 48)
                throw parse_error("field 'with_bruteforce': M = " +
                                  std::to_string(m) + " exceeds the brute-force cap");
        }
        break;
    }
    case ExperimentKind::correlation:
        if (cfg.m_grid.empty()) throw parse_error("field 'm_grid': must be nonempty");
        if (cfg.l_grid.empty()) throw parse_error("field 'l_grid': must be nonempty");
        break;
    case ExperimentKind::bprocess:
        if (cfg.m_grid.empty()) throw parse_error("field 'm_grid': must be nonempty");
        if (cfg.bp_alphas.empty())
            throw parse_error("field 'bp_alphas': must be nonempty");
        if (cfg.bp_thetas.empty())
            throw parse_error("field 'bp_thetas': must be nonempty");
        for (double a : cfg.bp_alphas)
            if (a == 0.0 || a == 1.0)
                throw parse_error("field 'bp_alphas': alpha must not be 0 or 1");
        if (cfg.bp_x_count < 1)
            throw parse_error("field 'bp_x_count': must be >= 1");
        break;
    case ExperimentKind::ikappa:
        if (cfg.m_grid.empty()) throw parse_error("field 'm_grid': must be nonempty");
        if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0))
            throw parse_error("field 'kappa': must lie in (0, 1)");
        cfg.phi.validate();
        break;
    case ExperimentKind::expsum_scan:
        if (cfg.t_grid.empty()) throw parse_error("field 't_grid': must be nonempty");
        if (cfg.scan_n < 2) throw parse_error("field 'scan_n': must be >= 2");
        if (cfg.scan_kind != "f2" && cfg.scan_kind != "lambda" &&
            cfg.scan_kind != "f1")
            throw parse_error("field 'scan_kind': must be f2, lambda or f1");
        break;
    }
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = experiment_name(cfg.experiment);
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["out_dir"] = cfg.out_dir;
    j["format"] = cfg.format;
    j["check"] = cfg.check;
    j["n_grid"] = cfg.n_grid;
    j["samples"] = cfg.samples;
    j["k"] = cfg.k;
    j["alpha2"] = cfg.alpha2;
    if (cfg.alpha3_fixed) j["alpha3"] = *cfg.alpha3_fixed;
    j["theta"] = cfg.theta;
    j["threshold"] = cfg.threshold_expr;
    j["m_grid"] = cfg.m_grid;
    j["delta"] = cfg.delta_expr;
    j["phi"] = {{"alpha", cfg.phi.alpha},
                {"beta", cfg.phi.beta},
                {"theta1", cfg.phi.theta1},
                {"theta2", cfg.phi.theta2}};
    j["with_bruteforce"] = cfg.with_bruteforce;
    j["l_grid"] = cfg.l_grid;
    j["bp_alphas"] = cfg.bp_alphas;
    j["bp_thetas"] = cfg.bp_thetas;
    j["bp_x_count"] = cfg.bp_x_count;
    j["kappa"] = cfg.kappa;
    j["scan_kind"] = cfg.scan_kind;
    j["t_grid"] = cfg.t_grid;
    j["scan_n"] = cfg.scan_n;
    return j.dump();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_to_json(cfg);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// --- tasks and rows ----------------------------------------------------------

namespace {

using Row = std::vector<std::string>;

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }
std::string fmt_i64(std::int64_t v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "1" : "0"; }

struct TaskPlan {
    std::vector<std::string> columns;
    std::vector<std::function<Row()>> tasks;
};

double parse_cell(const Row& row, const std::vector<std::string>& cols,
                  const std::string& name) {
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end())
        throw std::invalid_argument("column '" + name + "' not present");
    return std::strtod(row[static_cast<std::size_t>(it - cols.begin())].c_str(),
                       nullptr);
}

bool has_column(const std::vector<std::string>& cols, const std::string& name) {
    return std::find(cols.begin(), cols.end(), name) != cols.end();
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// least squares of y on x; returns slope only (the stats use nothing else)
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

TaskPlan plan_search(const ExperimentConfig& cfg) {
    TaskPlan plan;
    const bool prime = cfg.experiment == ExperimentKind::search_prime;
    plan.columns = {"N",  "sample", "alpha3",      "min_value", prime ? "p1" : "x1",
                    prime ? "p2" : "x2", prime ? "p3" : "x3", "evaluations",
                    "near_zero"};
    const bool with_threshold = !cfg.threshold_expr.empty();
    if (with_threshold) {
        plan.columns.push_back("threshold");
        plan.columns.push_back("exceeded");
    }

    std::vector<double> alpha3s = cfg.alpha3_fixed
                                      ? std::vector<double>{*cfg.alpha3_fixed}
                                      : sample_alpha3(cfg.seed, cfg.samples);
    for (std::uint64_t n : cfg.n_grid) {
        for (std::size_t s = 0; s < alpha3s.size(); ++s) {
            const double a3 = alpha3s[s];
            plan.tasks.push_back([&cfg, n, s, a3, prime, with_threshold]() {
                SearchOutcome out;
                if (prime) {
                    out = min_prime_form(n, cfg.alpha2, a3);
                } else {
                    TernaryForm form{cfg.k, cfg.alpha2, a3, cfg.theta};
                    out = min_shifted_form(n, form);
                }
                Row row{fmt_u64(n),
                        fmt_u64(s),
                        format_double(a3),
                        format_double(out.min_value),
                        fmt_i64(out.argmin[0]),
                        fmt_i64(out.argmin[1]),
                        fmt_i64(out.argmin[2]),
                        fmt_u64(out.evaluations),
                        fmt_bool(out.near_zero)};
                if (with_threshold) {
                    const double nd = static_cast<double>(n);
                    const double thr = eval_expr(
                        cfg.threshold_expr, {nd, nd, static_cast<double>(cfg.k)});
                    row.push_back(format_double(thr));
                    row.push_back(fmt_bool(out.min_value > thr));
                }
                return row;
            });
        }
    }
    return plan;
}

TaskPlan plan_count(const ExperimentConfig& cfg) {
    TaskPlan plan;
    plan.columns = {"M", "delta", "threshold", "count"};
    if (cfg.with_bruteforce) {
        plan.columns.push_back("count_bruteforce");
        plan.columns.push_back("equal");
    }
    for (std::uint64_t m : cfg.m_grid) {
        plan.tasks.push_back([&cfg, m]() {
            const double md = static_cast<double>(m);
            const double delta = eval_expr(cfg.delta_expr, {md, md, std::nullopt});
            const CountOutcome sorted = count_sorted(m, delta, cfg.phi);
            Row row{fmt_u64(m), format_double(delta),
                    format_double(sorted.threshold), fmt_u64(sorted.count)};
            if (cfg.with_bruteforce) {
                const CountOutcome brute = count_bruteforce(m, delta, cfg.phi);
                row.push_back(fmt_u64(brute.count));
                row.push_back(fmt_bool(brute.count == sorted.count));
            }
            return row;
        });
    }
    return plan;
}

TaskPlan plan_correlation(const ExperimentConfig& cfg) {
    TaskPlan plan;
    plan.columns = {"M", "L", "value", "ratio"};
    for (std::uint64_t m : cfg.m_grid)
        for (std::uint64_t l : cfg.l_grid)
            plan.tasks.push_back([m, l]() {
                const std::uint64_t v = correlation_r2(m, l);
                const double denom = static_cast<double>(l + 1) *
                                     static_cast<double>(m) *
                                     std::log(static_cast<double>(m));
                return Row{fmt_u64(m), fmt_u64(l), fmt_u64(v),
                           format_double(static_cast<double>(v) / denom)};
            });
    return plan;
}

TaskPlan plan_bprocess(const ExperimentConfig& cfg) {
    TaskPlan plan;
    plan.columns = {"alpha",    "theta", "M",     "X",
                    "L",        "L1",    "tau",   "lhs_re",
                    "lhs_im",   "rhs_main", "error", "budget",
                    "error_over_budget", "formulas_ok"};
    for (double alpha : cfg.bp_alphas)
        for (double theta : cfg.bp_thetas)
            for (std::uint64_t m : cfg.m_grid)
                for (std::size_t i = 0; i < cfg.bp_x_count; ++i) {
                    plan.tasks.push_back([alpha, theta, m, i, &cfg]() {
                        const double md = static_cast<double>(m);
                        double x = md;
                        if (cfg.bp_x_count > 1) {
                            const double f =
                                static_cast<double>(i) /
                                static_cast<double>(cfg.bp_x_count - 1);
                            x = std::pow(md, 1.0 + f);
                        }
                        x = std::clamp(x, md, md * md);
                        const BProcessReport rep = bprocess_check(x, m, alpha, theta);
                        // the displayed formulas, with the documented clamps
                        const double scale = std::fabs(alpha) * x / md;
                        const auto want_l = std::max<std::int64_t>(
                            1, static_cast<std::int64_t>(std::floor(
                                   std::pow(2.0, -std::fabs(alpha) - 1.0) * scale)));
                        const auto want_l1 = std::max<std::int64_t>(
                            want_l, static_cast<std::int64_t>(std::floor(
                                        std::pow(2.0, 2.0 + std::fabs(alpha)) * scale)));
                        const bool ok = rep.L == want_l && rep.L1 == want_l1 &&
                                        rep.L >= 1 && rep.L <= rep.L1;
                        return Row{format_double(alpha),
                                   format_double(theta),
                                   fmt_u64(m),
                                   format_double(x),
                                   fmt_i64(rep.L),
                                   fmt_i64(rep.L1),
                                   format_double(rep.tau),
                                   format_double(rep.lhs.real()),
                                   format_double(rep.lhs.imag()),
                                   format_double(rep.rhs_main),
                                   format_double(rep.error),
                                   format_double(rep.budget),
                                   format_double(rep.error / rep.budget),
                                   fmt_bool(ok)};
                    });
                }
    return plan;
}

TaskPlan plan_ikappa(const ExperimentConfig& cfg) {
    TaskPlan plan;
    plan.columns = {"kappa", "M", "alpha", "value", "value_over_m4"};
    for (std::uint64_t m : cfg.m_grid)
        plan.tasks.push_back([&cfg, m]() {
            IntegralQuery q;
            q.kappa = cfg.kappa;
            q.m = m;
            q.alpha = cfg.phi.alpha;
            q.phi = cfg.phi;
            const double v = i_kappa(q);
            const double m4 = std::pow(static_cast<double>(m), 4.0);
            return Row{format_double(cfg.kappa), fmt_u64(m),
                       format_double(cfg.phi.alpha), format_double(v),
                       format_double(v / m4)};
        });
    return plan;
}

TaskPlan plan_expsum_scan(const ExperimentConfig& cfg) {
    TaskPlan plan;
    plan.columns = {"t", "re", "im", "modulus", "modulus_over_scale"};
    for (double t : cfg.t_grid)
        plan.tasks.push_back([&cfg, t]() {
            std::complex<double> v;
            double scale = static_cast<double>(cfg.scan_n);
            if (cfg.scan_kind == "f2") {
                ExpSumQuery q;
                q.t = t;
                q.n = cfg.scan_n;
                q.theta3 = cfg.theta[2];
                v = f2(q);
            } else if (cfg.scan_kind == "lambda") {
                v = lambda_sum(t, cfg.scan_n);
            } else {
                TernaryForm form{cfg.k, cfg.alpha2,
                                 cfg.alpha3_fixed.value_or(0.5), cfg.theta};
                v = f1(t, cfg.scan_n, form);
                scale *= scale; // the double sum carries mass ~ N^2
            }
            return Row{format_double(t), format_double(v.real()),
                       format_double(v.imag()), format_double(std::abs(v)),
                       format_double(std::abs(v) / scale)};
        });
    return plan;
}

TaskPlan make_plan(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case ExperimentKind::search_prime:
    case ExperimentKind::search_shifted: return plan_search(cfg);
    case ExperimentKind::count_ineq: return plan_count(cfg);
    case ExperimentKind::correlation: return plan_correlation(cfg);
    case ExperimentKind::bprocess: return plan_bprocess(cfg);
    case ExperimentKind::ikappa: return plan_ikappa(cfg);
    case ExperimentKind::expsum_scan: return plan_expsum_scan(cfg);
    }
    throw std::logic_error("make_plan: unhandled experiment");
}

// --- stats -------------------------------------------------------------------

ExperimentKind kind_from_columns(const std::vector<std::string>& cols) {
    if (has_column(cols, "p1")) return ExperimentKind::search_prime;
    if (has_column(cols, "x1")) return ExperimentKind::search_shifted;
    if (has_column(cols, "count")) return ExperimentKind::count_ineq;
    if (has_column(cols, "ratio")) return ExperimentKind::correlation;
    if (has_column(cols, "error_over_budget")) return ExperimentKind::bprocess;
    if (has_column(cols, "value_over_m4")) return ExperimentKind::ikappa;
    if (has_column(cols, "modulus_over_scale")) return ExperimentKind::expsum_scan;
    throw parse_error("cannot infer experiment from CSV columns");
}

json build_stats(const std::vector<std::string>& cols,
                 const std::vector<Row>& rows) {
    const ExperimentKind kind = kind_from_columns(cols);
    json stats;
    stats["rows"] = rows.size();

    switch (kind) {
    case ExperimentKind::search_prime:
    case ExperimentKind::search_shifted: {
        // per-N medians of the minimum
        std::vector<std::pair<double, double>> n_min; // (N, min)
        std::map<std::uint64_t, std::vector<std::pair<double, double>>> by_sample;
        for (const Row& r : rows) {
            const double n = parse_cell(r, cols, "N");
            const double mv = parse_cell(r, cols, "min_value");
            const auto s = static_cast<std::uint64_t>(parse_cell(r, cols, "sample"));
            n_min.emplace_back(n, mv);
            by_sample[s].emplace_back(n, mv);
        }
        std::map<double, std::vector<double>> by_n;
        for (const auto& [n, mv] : n_min) by_n[n].push_back(mv);
        json medians;
        for (auto& [n, v] : by_n) medians[format_double(n)] = median(std::move(v));
        stats["median_min_by_n"] = medians;

        // per-sample power-law slopes (need >= 3 distinct N per sample)
        std::vector<double> slopes;
        for (auto& [s, pts] : by_sample) {
            std::sort(pts.begin(), pts.end());
            std::vector<double> lx, ly;
            for (const auto& [n, mv] : pts)
                if (mv > 0.0) {
                    lx.push_back(std::log(n));
                    ly.push_back(std::log(mv));
                }
            if (lx.size() >= 3 &&
                !std::equal(lx.begin() + 1, lx.end(), lx.begin()))
                slopes.push_back(ls_slope(lx, ly));
        }
        if (!slopes.empty()) stats["median_power_slope"] = median(slopes);

        if (has_column(cols, "exceeded")) {
            std::uint64_t exceeded = 0;
            for (const Row& r : rows)
                if (parse_cell(r, cols, "exceeded") != 0.0) ++exceeded;
            stats["exceptional_fraction"] =
                static_cast<double>(exceeded) / static_cast<double>(rows.size());
        }
        break;
    }
    case ExperimentKind::count_ineq: {
        std::vector<double> lm, lc;
        bool all_equal = true;
        for (const Row& r : rows) {
            lm.push_back(std::log(parse_cell(r, cols, "M")));
            lc.push_back(std::log(parse_cell(r, cols, "count")));
            if (has_column(cols, "equal") && parse_cell(r, cols, "equal") == 0.0)
                all_equal = false;
        }
        if (lm.size() >= 2 && !std::equal(lm.begin() + 1, lm.end(), lm.begin()))
            stats["slope_log_count_vs_log_m"] = ls_slope(lm, lc);
        if (has_column(cols, "equal")) stats["all_methods_equal"] = all_equal;
        break;
    }
    case ExperimentKind::correlation: {
        double best = -std::numeric_limits<double>::infinity();
        for (const Row& r : rows) best = std::max(best, parse_cell(r, cols, "ratio"));
        stats["max_ratio"] = best;
        break;
    }
    case ExperimentKind::bprocess: {
        double best = -std::numeric_limits<double>::infinity();
        bool ok = true;
        for (const Row& r : rows) {
            best = std::max(best, parse_cell(r, cols, "error_over_budget"));
            if (parse_cell(r, cols, "formulas_ok") == 0.0) ok = false;
        }
        stats["max_error_over_budget"] = best;
        stats["all_formulas_ok"] = ok;
        break;
    }
    case ExperimentKind::ikappa: {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const Row& r : rows) {
            const double v = parse_cell(r, cols, "value_over_m4");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        stats["min_value_over_m4"] = lo;
        stats["max_value_over_m4"] = hi;
        if (lo > 0.0) stats["spread_factor"] = hi / lo;
        break;
    }
    case ExperimentKind::expsum_scan: {
        double best = -std::numeric_limits<double>::infinity();
        for (const Row& r : rows)
            best = std::max(best, parse_cell(r, cols, "modulus_over_scale"));
        stats["max_modulus_over_scale"] = best;
        break;
    }
    }
    return stats;
}

bool run_check(const ExperimentConfig& cfg, const std::vector<std::string>& cols,
               const std::vector<Row>& rows, const json& stats) {
    switch (cfg.experiment) {
    case ExperimentKind::search_prime:
    case ExperimentKind::search_shifted: {
        for (const Row& r : rows) {
            const auto n = static_cast<std::uint64_t>(parse_cell(r, cols, "N"));
            const double mv = parse_cell(r, cols, "min_value");
            const bool prime = cfg.experiment == ExperimentKind::search_prime;
            const auto a = static_cast<std::int64_t>(
                parse_cell(r, cols, prime ? "p1" : "x1"));
            const auto b = static_cast<std::int64_t>(
                parse_cell(r, cols, prime ? "p2" : "x2"));
            const auto c = static_cast<std::int64_t>(
                parse_cell(r, cols, prime ? "p3" : "x3"));
            for (std::int64_t v : {a, b, c})
                if (v <= static_cast<std::int64_t>(n) ||
                    v > static_cast<std::int64_t>(2 * n))
                    return false;
            const double a3 = parse_cell(r, cols, "alpha3");
            double again;
            if (prime) {
                again = prime_form_value(static_cast<std::uint64_t>(a),
                                         static_cast<std::uint64_t>(b),
                                         static_cast<std::uint64_t>(c), cfg.alpha2,
                                         a3);
            } else {
                TernaryForm form{cfg.k, cfg.alpha2, a3, cfg.theta};
                again = shifted_form_value(form, a, b, c);
            }
            if (again != mv) return false;
        }
        return true;
    }
    case ExperimentKind::count_ineq:
        if (!cfg.with_bruteforce)
            throw config_error(
                "count_ineq --check needs with_bruteforce so both methods run");
        return stats.value("all_methods_equal", false);
    case ExperimentKind::correlation:
        return stats.value("max_ratio", 1e300) <= 20.0;
    case ExperimentKind::bprocess:
        return stats.value("all_formulas_ok", false) &&
               stats.value("max_error_over_budget", 1e300) <= 10.0;
    case ExperimentKind::ikappa:
        return stats.value("spread_factor", 1e300) < 10.0;
    case ExperimentKind::expsum_scan: {
        // conjugate symmetry at the first few scan points
        std::size_t checked = 0;
        for (double t : cfg.t_grid) {
            if (checked >= 3) break;
            ++checked;
            std::complex<double> plus, minus;
            if (cfg.scan_kind == "f2") {
                ExpSumQuery q;
                q.n = cfg.scan_n;
                q.theta3 = cfg.theta[2];
                q.t = t;
                plus = f2(q);
                q.t = -t;
                minus = f2(q);
            } else if (cfg.scan_kind == "lambda") {
                plus = lambda_sum(t, cfg.scan_n);
                minus = lambda_sum(-t, cfg.scan_n);
            } else {
                TernaryForm form{cfg.k, cfg.alpha2,
                                 cfg.alpha3_fixed.value_or(0.5), cfg.theta};
                plus = f1(t, cfg.scan_n, form);
                minus = f1(-t, cfg.scan_n, form);
            }
            const double scale = std::max(1.0, std::abs(plus));
            if (std::abs(minus - std::conj(plus)) > 1e-12 * scale) return false;
        }
        return true;
    }
    }
    return false;
}

} // namespace

ExperimentReport run(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const TaskPlan plan = make_plan(cfg);

    std::string out_dir = cfg.out_dir;
    if (out_dir.empty()) {
        const char* env = std::getenv("DIOPHLAB_OUT");
        out_dir = env && *env ? env : ".";
    }
    std::filesystem::create_directories(out_dir);
    const std::string base = out_dir + "/" + experiment_name(cfg.experiment);

    ExperimentReport report;
    report.columns = plan.columns;
    report.rows.resize(plan.tasks.size());

    // indexed slots keep row order equal to grid order for any worker count
    std::vector<char> done(plan.tasks.size(), 0);
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;

    std::ofstream csv;
    std::size_t written = 0;
    const bool to_csv = cfg.format == "csv";
    if (to_csv) {
        report.csv_path = base + ".csv";
        csv.open(report.csv_path);
        if (!csv) throw std::runtime_error("cannot open " + report.csv_path);
        for (std::size_t i = 0; i < plan.columns.size(); ++i)
            csv << (i ? "," : "") << plan.columns[i];
        csv << "\n";
        csv.flush();
    }

    auto drain_completed = [&]() { // caller holds mu
        while (written < done.size() && done[written]) {
            if (to_csv) {
                const Row& row = report.rows[written];
                for (std::size_t i = 0; i < row.size(); ++i)
                    csv << (i ? "," : "") << row[i];
                csv << "\n";
                csv.flush();
            }
            ++written;
        }
    };

    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= plan.tasks.size()) return;
            try {
                Row row = plan.tasks[idx]();
                std::lock_guard<std::mutex> lock(mu);
                report.rows[idx] = std::move(row);
                done[idx] = 1;
                drain_completed();
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const unsigned nworkers =
        std::max(1u, std::min<unsigned>(cfg.workers,
                                        static_cast<unsigned>(plan.tasks.size())));
    if (nworkers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nworkers);
        for (unsigned i = 0; i < nworkers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure); // partial CSV stays on disk

    const json stats = build_stats(plan.columns, report.rows);
    char hash_hex[19];
    std::snprintf(hash_hex, sizeof hash_hex, "0x%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    json summary;
    summary["provenance"] = {
        {"experiment", experiment_name(cfg.experiment)},
        {"version", kVersion},
        {"seed", cfg.seed},
        {"config_hash", hash_hex},
        {"config", json::parse(config_to_json(cfg))},
    };
    summary["stats"] = stats;
    report.summary_json = summary.dump(2);

    if (to_csv) {
        report.summary_path = base + "_summary.json";
        std::ofstream sj(report.summary_path);
        sj << report.summary_json << "\n";
    } else {
        report.summary_path = base + ".json";
        json doc;
        doc["columns"] = plan.columns;
        doc["rows"] = report.rows;
        doc["summary"] = summary;
        std::ofstream sj(report.summary_path);
        sj << doc.dump(2) << "\n";
    }

    if (cfg.check)
        report.check_passed = run_check(cfg, plan.columns, report.rows, stats);
    return report;
}

double estimate_exceptional(const std::vector<SearchRow>& rows,
                            const std::string& threshold_expr,
                            std::optional<double> k) {
    if (rows.empty())
        throw std::invalid_argument("estimate_exceptional: need at least one row");
    std::size_t exceeded = 0;
    for (const SearchRow& r : rows) {
        const double n = static_cast<double>(r.n);
        const double thr = eval_expr(threshold_expr, {n, n, k});
        if (r.min_value > thr) ++exceeded;
    }
    return static_cast<double>(exceeded) / static_cast<double>(rows.size());
}

std::string summarize_csv(const std::string& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw parse_error("cannot open CSV file '" + csv_path + "'");
    std::string line;
    if (!std::getline(in, line)) throw parse_error("CSV file is empty");

    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::stringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    const std::vector<std::string> cols = split(line);
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Row row = split(line);
        if (row.size() != cols.size())
            throw parse_error("CSV row has " + std::to_string(row.size()) +
                              " cells, header has " + std::to_string(cols.size()));
        rows.push_back(std::move(row));
    }

    json out;
    out["stats"] = build_stats(cols, rows);
    return out.dump(2);
}

} // namespace diophlab
