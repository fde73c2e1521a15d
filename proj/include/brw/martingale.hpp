#pragma once

#include <cstdint>
#include <vector>

#include "brw/fixedpoint.hpp"
#include "brw/simulate.hpp"

namespace brw {

struct DegenerateSample : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// sum of e^{-V} over a generation (compensated); empty -> 0
double additive(const std::vector<double>& positions);

// sum of e^{-beta V}; partition(g, 1) equals additive(g) bit-exactly
double partition(const std::vector<double>& positions, double beta);

// product of phi(e^{-V}) accumulated in log space; empty -> 1
double multiplicative(const std::vector<double>& positions, const PhiTable& phi);

struct NormingEstimate {
    int n = 0;
    double lambda_n = 0.0; // (mean W_n^{1/2})^{-2}
    double std_error = 0.0;
    int trials = 0;
};

NormingEstimate estimate_lambda(const OffspringLaw& law, int n, int trials,
                                std::uint64_t seed, Mode mode = Mode::exact());

// lambda_n * W_n over surviving trials only, for distributional comparison;
// identical (law, n, trials, seed, mode) reproduces estimate_lambda's runs
std::vector<double> conditioned_samples(const OffspringLaw& law, int n, int trials,
                                        std::uint64_t seed, Mode mode = Mode::exact());

} // namespace brw
