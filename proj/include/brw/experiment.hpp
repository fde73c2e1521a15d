#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brw/martingale.hpp"
#include "brw/rwtools.hpp"

namespace brw {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key=value experiment description. Schema (also in the README):
//   law               discrete-binary | gw-atoms | gauss-boundary | gaussian-binary
//   law.mu law.sigma2 parameters when law = gaussian-binary
//   law.normalize     true to boundary-normalize the law first
//   n_list            comma-separated strictly increasing horizons
//   trials            per-n trial count, >= 100
//   seed              master seed
//   mode              exact | cap | prune | prune_cap
//   mode.cap          cap size            (cap / prune_cap)
//   mode.delta        pruning window      (prune / prune_cap)
//   beta              inverse temperature for statistic = w_beta
//   statistic         min_v | w | w_beta | w_star | lambda_w
//   summary           mean | median | quantile
//   summary.p         quantile level in (0,1)
//   conditioning      all | survived
//   bounds.slope_lo   optional acceptance window on the regression slope
//   bounds.slope_hi
struct ExperimentConfig {
    std::string law_name = "discrete-binary";
    double law_mu = 0.0, law_sigma2 = 0.0;
    bool normalize = false;
    std::vector<int> n_list;
    int trials = 100;
    std::uint64_t seed = 1;
    std::string mode_name = "exact";
    double prune_delta = 30.0;
    std::size_t cap_size = 0;
    double beta = 2.0;
    std::string statistic = "w";
    std::string summary = "median";
    double quantile_p = 0.5;
    std::string conditioning = "survived";
    bool has_bounds = false;
    double slope_lo = 0.0, slope_hi = 0.0;
    bool allow_biased_min = false; // CLI flag, not part of the config file

    void validate() const; // throws ConfigError
    OffspringLaw make_law() const;
    Mode make_mode() const;
    std::string canonical() const;  // normalized key=value dump
    std::uint64_t hash() const;     // FNV-1a of canonical(); excludes timestamps
};

ExperimentConfig parse_config(const std::string& text);

struct CellSummary {
    int n = 0;
    double value = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; // bootstrap 95%, 1000 resamples
    int used = 0;                    // trials entering the summary
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<CellSummary> cells;
    double slope = 0.0, slope_ci_lo = 0.0, slope_ci_hi = 0.0;
    double intercept = 0.0, r2 = 0.0;
    bool has_regression = false;
    bool bounds_pass = true; // meaningful only when config.has_bounds
    std::uint64_t config_hash = 0;
    std::string version = "1";
};

// Deterministic given the config: fixed (n, trial) aggregation order. min_v
// regresses the raw median against log n (the statistic grows like log n);
// every other statistic is fitted log-log.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string report(const ExperimentResult& r, const std::string& format); // csv | markdown

// re-parse a CSV report; summary and regression values round-trip bit-exactly
ExperimentResult parse_report_csv(const std::string& text);

} // namespace brw
