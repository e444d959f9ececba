#pragma once

// Experiment orchestration: config loading, the threshold/schedule expression
// mini-language, seeded sweeps over parameter grids, CSV row emission and
// JSON summaries. Rows are a pure function of (config, seed); timings stay
// out of the files so reruns are byte-identical.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diophlab/forms.hpp"

namespace diophlab {

// --- schedule / threshold expressions -------------------------------------
//
// Grammar: sums, products (* or the middle dot), quotients, unary sign,
// right-associative ^, parentheses; atoms are numbers, "inf", and the
// variables M, N, k, logM, logN, loglogM, loglogN. Examples: "M^-2",
// "N^(k-3)*logN^2", "0.25".

struct ExprVars {
    std::optional<double> M;
    std::optional<double> N;
    std::optional<double> k;
};

// Parses and evaluates; throws parse_error on malformed input or on use of a
// variable absent from vars.
double eval_expr(const std::string& expr, const ExprVars& vars);

// --- experiment configuration ----------------------------------------------

enum class ExperimentKind {
    search_prime,
    search_shifted,
    count_ineq,
    correlation,
    bprocess,
    ikappa,
    expsum_scan,
};

const char* experiment_name(ExperimentKind kind);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::search_shifted;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string out_dir = ".";
    std::string format = "csv";           // csv | json
    bool check = false;

    // search experiments
    std::vector<std::uint64_t> n_grid;
    std::size_t samples = 1;              // alpha3 samples per N
    unsigned k = 2;
    double alpha2 = 1.0;
    std::optional<double> alpha3_fixed;   // overrides sampling when present
    std::array<double, 3> theta{0.0, 0.0, 0.0};
    std::string threshold_expr;           // exceptional-set threshold, optional

    // counting experiments
    std::vector<std::uint64_t> m_grid;
    std::string delta_expr = "M^-2";
    PhiPair phi;
    bool with_bruteforce = false;

    // correlation
    std::vector<std::uint64_t> l_grid;

    // bprocess
    std::vector<double> bp_alphas{2.0};
    std::vector<double> bp_thetas{0.0};
    std::size_t bp_x_count = 10;          // X values log-spaced in [M, M^2]

    // ikappa
    double kappa = 0.5;

    // expsum scan
    std::string scan_kind = "f2";         // f2 | lambda | f1
    std::vector<double> t_grid;
    std::uint64_t scan_n = 1000;
};

// Reads a JSON config file; unknown keys are rejected and messages name the
// offending field. Validates grids and checks the delta schedule is positive
// and finite on every grid point.
ExperimentConfig load_config(const std::string& path);

// Applies the same validation to an in-memory config (used by the CLI after
// flag overrides).
void validate_config(const ExperimentConfig& cfg);

// FNV-1a over the canonical serialization of the config; stable across runs.
std::uint64_t config_hash(const ExperimentConfig& cfg);

// Canonical JSON text of a config (the hashing input; also echoed into
// summaries).
std::string config_to_json(const ExperimentConfig& cfg);

// --- reports ----------------------------------------------------------------

struct ExperimentReport {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;  // cells already serialized
    std::string summary_json;                    // stats + provenance
    std::string csv_path;                        // empty when not written
    std::string summary_path;
    bool check_passed = true;                    // meaningful when cfg.check
};

// Runs the configured experiment. Writes <out_dir>/<experiment>.csv row by
// row and <experiment>_summary.json at completion when format == "csv";
// format == "json" writes a single JSON document with rows inlined. The
// returned report holds everything that was written.
ExperimentReport run(const ExperimentConfig& cfg);

// One row of a search experiment, as consumed by estimate_exceptional.
struct SearchRow {
    std::uint64_t n = 0;
    double alpha3 = 0.0;
    double min_value = 0.0;
};

// Fraction of rows whose min_value exceeds the threshold expression
// evaluated at that row's N (variables M and N both bind to N; k binds to
// row-independent cfg k only when given through vars explicitly).
double estimate_exceptional(const std::vector<SearchRow>& rows,
                            const std::string& threshold_expr,
                            std::optional<double> k = std::nullopt);

// Recomputes the "stats" object of a summary from an emitted CSV file.
// Byte-identical to the stats block produced by run() for the same rows.
std::string summarize_csv(const std::string& csv_path);

// Serializes a double the way every CSV/JSON writer here does: shortest
// text that round-trips (17 significant digits, trimmed).
std::string format_double(double v);

} // namespace diophlab
