#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "brw/spine.hpp"

namespace brw {

struct NonPositiveStatistic : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// one sampled trajectory of the centered spine walk S_0 = 0, S_1, ..., S_n
struct RandomWalkPath {
    std::vector<double> steps; // S_0 .. S_n
    double running_min = 0.0;  // min over 0..n, always <= 0
    int argmin = 0;            // smallest index attaining the min
};

RandomWalkPath sample_walk(const OffspringLaw& law, int n, std::uint64_t seed,
                           std::uint64_t trial);

// P{min_{1<=k<=n} S_k > 0} for the spine walk of a boundary law. Small atom
// laws with n <= 24 are done by exact lattice convolution (std_error = 0);
// everything else by Monte Carlo over `trials` walks.
std::pair<double, double> stay_positive(const OffspringLaw& law, int n, int trials,
                                        std::uint64_t seed);

// E[e^{b min_{0<=i<=n} S_i}] by Monte Carlo; b = 0 or n = 0 are exact.
std::pair<double, double> min_exp_moment(const OffspringLaw& law, double b, int n,
                                         int trials, std::uint64_t seed);

struct RegressFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// least squares of log(statistic) against log(n); needs >= 3 pairs with
// positive statistics
RegressFit exponent_regress(const std::vector<std::pair<double, double>>& pairs);

} // namespace brw
